"""Command-line front door.

Subcommands:

* ``simulate``  — run the synthetic chain and write instrumentation CSVs
* ``analyze``   — turn micro/macro CSVs into classification, models, curves
* ``plot``      — render a bundle table as a deterministic SVG chart
* ``economics`` — fee vs infrastructure cost, scalar or per window
* ``schedule materialize`` — emit an integer gas schedule at a height

Exit codes: 0 success, 2 input error, 3 write/IO error. Output directories
resolve relative to $GASLAB_OUT when that is set. Every command writes a
manifest recording inputs, parameters, and output hashes; rerunning with
identical inputs and seeds reproduces every byte.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from .chain import run_chain
from .clock import VirtualClock, WallClock
from .evm.schedule import GasSchedule, ScheduleError, default_schedule
from .metrics import (CsvFormatError, read_macro_csv, read_micro_csv,
                      write_macro_csv, write_micro_csv)
from .model import (InsufficientDataError, InvalidConstantError, load_models,
                    materialize_schedule, propose_gas_model, save_models)
from .report.bundle import atomic_write_text, write_manifest
from .report.economics import (economics_table, fee_economics,
                               read_price_csv)
from .report.pipeline import analyze_windows
from .report.svg import render_line_chart
from .workload import WorkloadError, load_workload

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_IO = 3

RECEIPTS_HEADER = "height,tx_index,status,gas_used,gas_limit,instructions"


class InputError(Exception):
    """User-facing input problem; maps to exit code 2."""


def _out_dir(raw: str) -> Path:
    root = os.environ.get("GASLAB_OUT")
    path = Path(raw)
    if root and not path.is_absolute():
        path = Path(root) / path
    return path


def _load_schedule(path: str | None) -> GasSchedule:
    if path is None:
        return default_schedule()
    if not Path(path).exists():
        raise InputError(f"schedule file not found: {path}")
    return GasSchedule.load(path)


def _require_file(path: str, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"{what} not found: {path}")
    return p


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def cmd_simulate(args: argparse.Namespace) -> int:
    spec_path = _require_file(args.workload, "workload spec")
    spec = load_workload(spec_path)
    if args.seed is not None:
        spec = dataclasses.replace(spec, seed=args.seed)
    schedule = _load_schedule(args.schedule)
    clock = VirtualClock() if args.clock == "virtual" else WallClock

    report = run_chain(spec, args.blocks, schedule,
                       window_size=args.window, clock=clock,
                       cache_capacity=args.cache,
                       repetitions=args.repetitions)

    out = _out_dir(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_micro_csv(report.windows, out / "micro.csv")
    write_macro_csv(report.windows, out / "macro.csv")
    receipt_lines = [RECEIPTS_HEADER]
    receipt_lines += [
        f"{r.height},{r.tx_index},{r.status},{r.gas_used},{r.gas_limit},"
        f"{r.instructions}" for r in report.receipts]
    atomic_write_text(out / "receipts.csv", "\n".join(receipt_lines) + "\n")
    summary = {
        "blocks": report.num_blocks,
        "window_size": report.window_size,
        "clock": report.clock_mode,
        "seed": spec.seed,
        "final_state_root": report.final_root.hex(),
        "initial_keys": report.initial_keys,
        "final_keys": report.final_keys,
        "transactions": len(report.receipts),
    }
    atomic_write_text(out / "run.json",
                      json.dumps(summary, indent=2, sort_keys=True) + "\n")
    write_manifest(out, "simulate",
                   params={"blocks": args.blocks, "window": args.window,
                           "seed": spec.seed, "clock": args.clock,
                           "cache": args.cache,
                           "repetitions": args.repetitions},
                   inputs={"workload": spec_path},
                   outputs=["micro.csv", "macro.csv", "receipts.csv",
                            "run.json"])
    print(f"simulated {report.num_blocks} blocks "
          f"({len(report.receipts)} transactions) -> {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------

def _read_receipt_length(path: Path) -> float:
    lengths = []
    saw_header = False
    for line_no, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not saw_header:
            if line != RECEIPTS_HEADER:
                raise CsvFormatError(str(path), line_no,
                                     f"expected header {RECEIPTS_HEADER!r}")
            saw_header = True
            continue
        parts = line.split(",")
        if len(parts) != 6:
            raise CsvFormatError(str(path), line_no,
                                 f"expected 6 fields, got {len(parts)}")
        if parts[2] == "success":
            lengths.append(int(parts[5]))
    if not lengths:
        raise InputError(f"{path}: no successful transactions")
    return sum(lengths) / len(lengths)


def cmd_analyze(args: argparse.Namespace) -> int:
    micro_path = _require_file(args.micro, "micro CSV")
    micro = read_micro_csv(micro_path)
    inputs = {"micro": micro_path}
    macro = []
    if args.macro:
        macro_path = _require_file(args.macro, "macro CSV")
        macro = read_macro_csv(macro_path)
        inputs["macro"] = macro_path
    length = None
    if args.receipts:
        receipts_path = _require_file(args.receipts, "receipts CSV")
        length = _read_receipt_length(receipts_path)
        inputs["receipts"] = receipts_path

    result = analyze_windows(micro, macro, threshold=args.threshold,
                             target_tpg=args.tpg_constant,
                             split_seed=args.split_seed,
                             contract_length=length)

    out = _out_dir(args.out)
    out.mkdir(parents=True, exist_ok=True)

    cls = result.classification
    lines = ["opcode,windows,correlation,label"]
    for op in sorted(cls.labels):
        lines.append(f"{op},{cls.windows_used[op]},{cls.correlations[op]!r},"
                     f"{cls.labels[op]}")
    atomic_write_text(out / "classification.csv", "\n".join(lines) + "\n")

    save_models(result.time_models, out / "time_models.json")
    save_models(result.proposed_gas.models, out / "proposed_gas_models.json")

    lines = ["window_start,dependent_share,extrapolated"]
    lines += [f"{n},{share!r},{int(extra)}"
              for n, share, extra in result.dep_share]
    atomic_write_text(out / "dep_share.csv", "\n".join(lines) + "\n")

    lines = ["window_start,current_model_gas,proposed_model_gas"]
    lines += [f"{n},{result.current_model_gas[n]!r},"
              f"{result.proposed_model_gas[n]!r}"
              for n in result.window_heights]
    atomic_write_text(out / "gas_curves.csv", "\n".join(lines) + "\n")

    lines = ["window_start,observed_tpg,current_model_tpg,"
             "proposed_model_tpg,proposed_integer_tpg"]
    for n in result.window_heights:
        observed = result.observed_tpg.get(n)
        lines.append(
            f"{n},{'' if observed is None else repr(observed)},"
            f"{result.current_model_tpg[n]!r},"
            f"{result.proposed_model_tpg[n]!r},"
            f"{result.proposed_integer_tpg[n]!r}")
    atomic_write_text(out / "tpg_curves.csv", "\n".join(lines) + "\n")

    lines = ["window_start,opcode,time_share"]
    lines += [f"{n},{op},{share!r}" for n, op, share in result.time_share_rows]
    atomic_write_text(out / "time_share.csv", "\n".join(lines) + "\n")

    lines = ["window_start,relative_difference"]
    lines += [f"{n},{d!r}" for n, d in result.macro_micro]
    atomic_write_text(out / "macro_micro.csv", "\n".join(lines) + "\n")

    chi_doc: dict[str, object]
    if result.chi_square is not None:
        chi_doc = {"statistic": result.chi_square.statistic,
                   "dof": result.chi_square.dof,
                   "critical": result.chi_square.critical,
                   "accept": result.chi_square.accept,
                   "bins": result.chi_square.bins}
    else:
        chi_doc = {"error": result.chi_square_error or "no macro data"}
    atomic_write_text(out / "chi_square.json",
                      json.dumps(chi_doc, indent=2, sort_keys=True) + "\n")

    contract_doc = {"length": result.contract.length,
                    "frequencies": dict(sorted(
                        result.contract.frequencies.items()))}
    atomic_write_text(out / "standard_contract.json",
                      json.dumps(contract_doc, indent=2, sort_keys=True) + "\n")

    summary = {
        "threshold": args.threshold,
        "target_tpg": args.tpg_constant,
        "split_seed": args.split_seed,
        "dependent_opcodes": cls.dependent_opcodes(),
        "skipped_opcodes": dict(sorted(cls.skipped.items())),
        "early_window_observed_tpg": result.early_tpg,
        "kendall": dict(sorted(result.kendall.items())),
    }
    atomic_write_text(out / "summary.json",
                      json.dumps(summary, indent=2, sort_keys=True) + "\n")

    outputs = ["classification.csv", "time_models.json",
               "proposed_gas_models.json", "dep_share.csv", "gas_curves.csv",
               "tpg_curves.csv", "time_share.csv", "macro_micro.csv",
               "chi_square.json", "standard_contract.json", "summary.json"]
    write_manifest(out, "analyze",
                   params={"threshold": args.threshold,
                           "tpg_constant": args.tpg_constant,
                           "split_seed": args.split_seed},
                   inputs=inputs, outputs=outputs)
    print(f"analysis of {len(micro)} windows -> {out}")
    print(f"dependent opcodes: {', '.join(cls.dependent_opcodes()) or 'none'}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# plot
# ---------------------------------------------------------------------------

FIGURES = {
    "tpg-observed": ("tpg_curves.csv", "block height", "time per gas (ns)",
                     [("observed_tpg", "observed")]),
    "tpg-model": ("tpg_curves.csv", "block height", "time per gas (ns)",
                  [("current_model_tpg", "current schedule"),
                   ("proposed_model_tpg", "proposed schedule")]),
    "gas-model": ("gas_curves.csv", "block height", "avg program gas",
                  [("current_model_gas", "current schedule"),
                   ("proposed_model_gas", "proposed schedule")]),
    "dep-share": ("dep_share.csv", "block height", "dependent time share",
                  [("dependent_share", "dependent share")]),
    "fee-vs-infra": ("economics.csv", "window start", "USD",
                     [("fee_usd", "transaction fees"),
                      ("infra_usd", "infrastructure cost")]),
}


def _read_table(path: Path) -> tuple[list[str], list[list[str]]]:
    rows = []
    header: list[str] | None = None
    for raw in path.read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if header is None:
            header = line.split(",")
            continue
        rows.append(line.split(","))
    if header is None:
        raise InputError(f"{path}: empty table")
    return header, rows


def cmd_plot(args: argparse.Namespace) -> int:
    if args.figure not in FIGURES:
        raise InputError(
            f"unknown figure {args.figure!r}; available: "
            f"{', '.join(sorted(FIGURES))}")
    table_name, x_label, y_label, columns = FIGURES[args.figure]
    bundle = Path(args.bundle)
    table_path = bundle / table_name
    if not table_path.is_file():
        raise InputError(f"bundle table not found: {table_path}")
    header, rows = _read_table(table_path)
    x_col = header[0]
    series = []
    for column, label in columns:
        if column not in header:
            raise InputError(f"{table_path}: missing column {column!r}")
        idx = header.index(column)
        points = []
        for row in rows:
            if row[idx] == "":
                continue
            points.append((float(row[0]), float(row[idx])))
        if points:
            series.append((label, points))
    if not series:
        raise InputError(f"{table_path}: no plottable data")
    svg = render_line_chart(f"{args.figure} ({x_col})", x_label, y_label,
                            series)
    out_path = Path(args.out) if args.out else bundle / f"{args.figure}.svg"
    out_path.parent.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out_path, svg)
    print(f"wrote {out_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# economics
# ---------------------------------------------------------------------------

def cmd_economics(args: argparse.Namespace) -> int:
    prices_path = _require_file(args.prices, "price series")
    prices = read_price_csv(prices_path)

    if args.micro:
        micro = read_micro_csv(_require_file(args.micro, "micro CSV"))
        macro = (read_macro_csv(_require_file(args.macro, "macro CSV"))
                 if args.macro else micro)
        rows = economics_table(micro, macro, prices, args.gas_price)
        out = _out_dir(args.out)
        out.mkdir(parents=True, exist_ok=True)
        lines = ["window_start,gas,fee_usd,infra_usd,ratio"]
        lines += [f"{r['window_start']},{r['gas']},{r['fee_usd']!r},"
                  f"{r['infra_usd']!r},{r['ratio']!r}" for r in rows]
        atomic_write_text(out / "economics.csv", "\n".join(lines) + "\n")
        inputs = {"prices": prices_path, "micro": Path(args.micro)}
        if args.macro:
            inputs["macro"] = Path(args.macro)
        write_manifest(out, "economics",
                       params={"gas_price": args.gas_price},
                       inputs=inputs, outputs=["economics.csv"])
        print(f"wrote {out / 'economics.csv'}")
        return EXIT_OK

    if args.gas is None or args.hours is None:
        raise InputError("scalar mode needs --gas and --hours "
                         "(or provide --micro for table mode)")
    point = prices[0]
    for candidate in prices:
        if candidate.window_start <= args.window_start:
            point = candidate
    econ = fee_economics(args.gas, args.gas_price, point.eth_usd,
                         args.hours, point.infra_usd_per_hour)
    print(f"fee_usd={econ.fee_usd!r} infra_usd={econ.infra_usd!r} "
          f"ratio={econ.ratio!r}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# schedule materialize
# ---------------------------------------------------------------------------

def cmd_schedule_materialize(args: argparse.Namespace) -> int:
    models_path = _require_file(args.models, "time models JSON")
    time_models = load_models(models_path)
    gas_model = propose_gas_model(time_models, args.tpg_constant)
    base = _load_schedule(args.base)
    schedule = materialize_schedule(gas_model, args.height, base)
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    header = (f"# Repriced schedule materialized at height {args.height} "
              f"with C={args.tpg_constant}\n")
    atomic_write_text(out_path, header + schedule.format())
    print(f"wrote {out_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaslab",
        description="Desk-scale EVM gas-cost laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the synthetic chain")
    p.add_argument("--workload", required=True, help="workload spec JSON")
    p.add_argument("--blocks", type=int, required=True)
    p.add_argument("--window", type=int, default=500,
                   help="aggregation window in blocks (default 500)")
    p.add_argument("--seed", type=int, default=None,
                   help="override the workload seed")
    p.add_argument("--schedule", default=None,
                   help="gas schedule config (default: built-in)")
    p.add_argument("--clock", choices=("wall", "virtual"), default="wall",
                   help="wall time or deterministic virtual time")
    p.add_argument("--cache", type=int, default=0,
                   help="node-store read cache capacity (default 0)")
    p.add_argument("--repetitions", type=int, default=1,
                   help="runs per block, median-of-runs timing")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="analyze instrumentation CSVs")
    p.add_argument("--micro", required=True)
    p.add_argument("--macro", default=None)
    p.add_argument("--receipts", default=None,
                   help="receipts CSV for the contract length estimate")
    p.add_argument("--threshold", type=float, default=0.7,
                   help="dependence correlation threshold (default 0.7)")
    p.add_argument("--tpg-constant", type=float, default=5.0,
                   help="target time per unit gas C (default 5)")
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("plot", help="render a bundle table as SVG")
    p.add_argument("--bundle", required=True)
    p.add_argument("--figure", required=True,
                   help=", ".join(sorted(FIGURES)))
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("economics", help="fee vs infrastructure cost")
    p.add_argument("--prices", required=True,
                   help="CSV: window_start,eth_usd,infra_usd_per_hour")
    p.add_argument("--gas-price", type=int, default=20_000_000_000,
                   help="gas price in wei (default 20 gwei)")
    p.add_argument("--micro", default=None, help="micro CSV (table mode)")
    p.add_argument("--macro", default=None, help="macro CSV for wall time")
    p.add_argument("--gas", type=int, default=None, help="scalar mode: gas")
    p.add_argument("--hours", type=float, default=None,
                   help="scalar mode: wall hours")
    p.add_argument("--window-start", type=int, default=0,
                   help="scalar mode: price point to use")
    p.add_argument("--out", default="economics")
    p.set_defaults(func=cmd_economics)

    p = sub.add_parser("schedule", help="gas schedule tools")
    sched_sub = p.add_subparsers(dest="schedule_command", required=True)
    m = sched_sub.add_parser("materialize",
                             help="integer schedule at a height")
    m.add_argument("--models", required=True, help="time models JSON")
    m.add_argument("--height", type=int, required=True)
    m.add_argument("--tpg-constant", type=float, default=5.0)
    m.add_argument("--base", default=None,
                   help="base schedule for unmodeled opcodes")
    m.add_argument("--out", required=True)
    m.set_defaults(func=cmd_schedule_materialize)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, WorkloadError, CsvFormatError, ScheduleError,
            InsufficientDataError, InvalidConstantError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

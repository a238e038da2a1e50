"""CLI contract: exit codes, determinism, and the fixture analysis."""

import json
from importlib import resources
from pathlib import Path

import pytest

from gaslab.cli import main
from gaslab.evm.opcodes import Opcode
from gaslab.evm.schedule import GasSchedule

DATA = resources.files("gaslab").joinpath("data")
SLOAD_HEAVY = str(DATA / "workloads" / "sload_heavy.json")
TABLE3 = str(DATA / "fixtures" / "table3_micro.csv")
PRICES = str(DATA / "fixtures" / "prices_fig1.csv")


def run_cli(*argv):
    return main(list(argv))


def simulate(out_dir, blocks=400, window=100, extra=()):
    code = run_cli("simulate", "--workload", SLOAD_HEAVY,
                   "--blocks", str(blocks), "--window", str(window),
                   "--clock", "virtual", "--out", str(out_dir), *extra)
    assert code == 0
    return Path(out_dir)


def test_simulate_writes_bundle(tmp_path):
    out = simulate(tmp_path / "sim")
    for name in ("micro.csv", "macro.csv", "receipts.csv", "run.json",
                 "manifest.json"):
        assert (out / name).is_file(), name
    run_doc = json.loads((out / "run.json").read_text())
    assert run_doc["blocks"] == 400
    assert run_doc["clock"] == "virtual"


def test_simulate_is_byte_identical_under_virtual_clock(tmp_path):
    out_a = simulate(tmp_path / "a")
    out_b = simulate(tmp_path / "b")
    for name in ("micro.csv", "macro.csv", "receipts.csv", "run.json",
                 "manifest.json"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes(), name


def test_simulate_missing_workload_is_exit_2(tmp_path):
    assert run_cli("simulate", "--workload", str(tmp_path / "no.json"),
                   "--blocks", "5", "--out", str(tmp_path / "x")) == 2


def test_simulate_invalid_workload_is_exit_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"transactions_per_block": 1,
                               "program_length": 4,
                               "mix": {"ADD": 0.7},
                               "fresh_key_rate": 0.0, "seed": 1}))
    assert run_cli("simulate", "--workload", str(bad), "--blocks", "5",
                   "--out", str(tmp_path / "x")) == 2


def test_seed_override_changes_outputs(tmp_path):
    out_a = simulate(tmp_path / "a", blocks=100)
    out_b = simulate(tmp_path / "b", blocks=100, extra=("--seed", "999"))
    assert (out_a / "micro.csv").read_bytes() != \
           (out_b / "micro.csv").read_bytes()


def test_analyze_classifies_table3_fixture(tmp_path):
    out = tmp_path / "an"
    assert run_cli("analyze", "--micro", TABLE3, "--out", str(out)) == 0
    rows = (out / "classification.csv").read_text().splitlines()[1:]
    labels = {row.split(",")[0]: row.split(",")[3] for row in rows}
    assert labels == {"SLOAD": "dependent", "SSTORE": "dependent",
                      "PUSH1": "independent", "MSTORE": "independent"}


def test_analyze_is_deterministic(tmp_path):
    sim = simulate(tmp_path / "sim", blocks=600, window=50)
    outs = []
    for name in ("an1", "an2"):
        out = tmp_path / name
        assert run_cli("analyze", "--micro", str(sim / "micro.csv"),
                       "--macro", str(sim / "macro.csv"),
                       "--receipts", str(sim / "receipts.csv"),
                       "--out", str(out)) == 0
        outs.append(out)
    for child in sorted(outs[0].iterdir()):
        assert child.read_bytes() == (outs[1] / child.name).read_bytes(), \
            child.name


def test_analyze_empty_micro_is_exit_2(tmp_path):
    empty = tmp_path / "micro.csv"
    empty.write_text("window_start,opcode,count,total_gas,total_time_ns\n")
    assert run_cli("analyze", "--micro", str(empty),
                   "--out", str(tmp_path / "o")) == 2


def test_analyze_malformed_row_reports_line_number(tmp_path, capsys):
    bad = tmp_path / "micro.csv"
    bad.write_text("window_start,opcode,count,total_gas,total_time_ns\n"
                   "0,ADD,1,3,9\n0,MUL,nope,5,5\n")
    assert run_cli("analyze", "--micro", str(bad),
                   "--out", str(tmp_path / "o")) == 2
    err = capsys.readouterr().err
    assert ":3:" in err  # the offending line number


def test_plot_unknown_figure_is_exit_2(tmp_path):
    sim = simulate(tmp_path / "sim", blocks=200, window=50)
    out = tmp_path / "an"
    run_cli("analyze", "--micro", str(sim / "micro.csv"), "--out", str(out))
    assert run_cli("plot", "--bundle", str(out), "--figure", "nope") == 2


def test_plot_is_deterministic(tmp_path):
    sim = simulate(tmp_path / "sim", blocks=200, window=50)
    out = tmp_path / "an"
    run_cli("analyze", "--micro", str(sim / "micro.csv"), "--out", str(out))
    svg_a = tmp_path / "a.svg"
    svg_b = tmp_path / "b.svg"
    assert run_cli("plot", "--bundle", str(out), "--figure", "tpg-model",
                   "--out", str(svg_a)) == 0
    assert run_cli("plot", "--bundle", str(out), "--figure", "tpg-model",
                   "--out", str(svg_b)) == 0
    assert svg_a.read_bytes() == svg_b.read_bytes()
    assert svg_a.read_text().startswith("<svg ")


def test_plot_model_curves_show_rising_current_flat_proposed(tmp_path):
    # the visual assertion targets the underlying table, not pixels
    sim = simulate(tmp_path / "sim", blocks=800, window=80)
    out = tmp_path / "an"
    run_cli("analyze", "--micro", str(sim / "micro.csv"), "--out", str(out))
    rows = (out / "tpg_curves.csv").read_text().splitlines()[1:]
    current = [float(r.split(",")[2]) for r in rows]
    proposed = [float(r.split(",")[3]) for r in rows]
    assert current[-1] > current[0]
    assert all(abs(p - 5.0) / 5.0 < 1e-9 for p in proposed)
    assert run_cli("plot", "--bundle", str(out), "--figure",
                   "tpg-model") == 0


def test_economics_scalar_and_table_modes(tmp_path, capsys):
    code = run_cli("economics", "--prices", PRICES,
                   "--gas", "166700000000", "--gas-price", "60000000000",
                   "--hours", "0.4278", "--window-start", "4880000")
    assert code == 0
    line = capsys.readouterr().out
    assert "ratio=" in line
    ratio = float(line.rsplit("ratio=", 1)[1])
    assert ratio > 1e7

    sim = simulate(tmp_path / "sim", blocks=200, window=50)
    out = tmp_path / "eco"
    assert run_cli("economics", "--prices", PRICES,
                   "--micro", str(sim / "micro.csv"),
                   "--macro", str(sim / "macro.csv"),
                   "--out", str(out)) == 0
    table = (out / "economics.csv").read_text().splitlines()
    assert table[0] == "window_start,gas,fee_usd,infra_usd,ratio"
    assert len(table) == 1 + 4
    assert run_cli("plot", "--bundle", str(out),
                   "--figure", "fee-vs-infra") == 0


def test_schedule_materialize_round_trips(tmp_path):
    sim = simulate(tmp_path / "sim", blocks=600, window=50)
    out = tmp_path / "an"
    run_cli("analyze", "--micro", str(sim / "micro.csv"), "--out", str(out))
    cfg = tmp_path / "repriced.cfg"
    assert run_cli("schedule", "materialize",
                   "--models", str(out / "time_models.json"),
                   "--height", "600", "--out", str(cfg)) == 0
    schedule = GasSchedule.load(cfg)
    assert schedule.rule_for(Opcode.SLOAD).cost >= 1
    assert schedule.intrinsic_gas == 21_000


def test_gaslab_out_env_var_roots_output(tmp_path, monkeypatch):
    monkeypatch.setenv("GASLAB_OUT", str(tmp_path))
    simulate("rooted", blocks=100, window=50)
    assert (tmp_path / "rooted" / "micro.csv").is_file()

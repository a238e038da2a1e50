"""Fee economics: what users pay versus what the computation costs to run.

Fees convert as gas x gas-price (wei) x 1e-18 (wei per ETH) x ETH/USD;
infrastructure cost is wall hours times an hourly machine rate. The hourly
rate is always user-supplied input (price files), never hardcoded.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from ..metrics import CsvFormatError, WindowAggregate
from ..model.base import UndefinedRatioError

WEI_PER_ETH = 10 ** 18
NS_PER_HOUR = 3_600_000_000_000

PRICES_HEADER = "window_start,eth_usd,infra_usd_per_hour"


@dataclass(frozen=True)
class PricePoint:
    window_start: int
    eth_usd: float
    infra_usd_per_hour: float

    def __post_init__(self):
        if self.eth_usd < 0 or self.infra_usd_per_hour < 0:
            raise ValueError("prices must be non-negative")


@dataclass(frozen=True)
class FeeEconomics:
    fee_usd: float
    infra_usd: float
    ratio: float


def fee_economics(gas_used: float, gas_price_wei: float, eth_usd: float,
                  wall_hours: float, infra_usd_per_hour: float) -> FeeEconomics:
    """Scalar fee-vs-infrastructure comparison."""
    if min(gas_used, gas_price_wei, eth_usd, wall_hours,
           infra_usd_per_hour) < 0:
        raise ValueError("economics inputs must be non-negative")
    fee_usd = gas_used * gas_price_wei / WEI_PER_ETH * eth_usd
    infra_usd = wall_hours * infra_usd_per_hour
    if infra_usd == 0:
        raise UndefinedRatioError("infrastructure cost is zero")
    return FeeEconomics(fee_usd, infra_usd, fee_usd / infra_usd)


def read_price_csv(path: str | Path) -> list[PricePoint]:
    path = Path(path)
    points = []
    saw_header = False
    for line_no, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not saw_header:
            if line != PRICES_HEADER:
                raise CsvFormatError(str(path), line_no,
                                     f"expected header {PRICES_HEADER!r}")
            saw_header = True
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise CsvFormatError(str(path), line_no,
                                 f"expected 3 fields, got {len(parts)}")
        try:
            points.append(PricePoint(int(parts[0]), float(parts[1]),
                                     float(parts[2])))
        except ValueError as exc:
            raise CsvFormatError(str(path), line_no, str(exc)) from None
    if not saw_header:
        raise CsvFormatError(str(path), 1, "missing header")
    if not points:
        raise CsvFormatError(str(path), 1, "no data rows")
    return sorted(points, key=lambda p: p.window_start)


def _price_for(points: Sequence[PricePoint], window_start: int) -> PricePoint:
    """Latest price point at or before the window (first one otherwise)."""
    chosen = points[0]
    for point in points:
        if point.window_start <= window_start:
            chosen = point
        else:
            break
    return chosen


def economics_table(micro: Sequence[WindowAggregate],
                    macro: Sequence[WindowAggregate],
                    prices: Sequence[PricePoint],
                    gas_price_wei: int) -> list[dict]:
    """Per-window fee vs infrastructure cost rows (the Fig-1 style table)."""
    macro_by_start = {w.start: w for w in macro}
    rows = []
    for window in micro:
        total_ns = macro_by_start.get(window.start, window).categories.get(
            "Total", 0)
        point = _price_for(prices, window.start)
        gas = window.instruction_gas_total()
        fee_usd = gas * gas_price_wei / WEI_PER_ETH * point.eth_usd
        infra_usd = total_ns / NS_PER_HOUR * point.infra_usd_per_hour
        rows.append({
            "window_start": window.start,
            "gas": gas,
            "fee_usd": fee_usd,
            "infra_usd": infra_usd,
            "ratio": fee_usd / infra_usd if infra_usd else float("nan"),
        })
    return rows

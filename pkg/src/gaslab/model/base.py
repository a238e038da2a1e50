"""Shared model types and errors for the cost-model package."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional


class InsufficientDataError(ValueError):
    """Not enough observations to classify, fit, or test."""


class MissingModelError(KeyError):
    """An opcode with nonzero frequency has no time/gas model."""


class UndefinedRatioError(ZeroDivisionError):
    """A ratio against a zero denominator was requested."""


class FitError(ValueError):
    """Degenerate regression input (e.g. all heights equal)."""


class InvalidConstantError(ValueError):
    """The target time-per-gas constant must be positive."""


@dataclass(frozen=True)
class ScalarModel:
    """Per-opcode prediction, constant or polynomial in block-height.

    Polynomial coefficients are ascending powers of the standardized input
    (n - x_center) / x_scale; hand-built models use center 0 / scale 1 so
    coefficients read directly in block-height. Negative evaluations clamp
    to `min_observed` (the smallest training observation).
    """

    kind: str  # "constant" | "polynomial"
    coefficients: tuple[float, ...]
    x_center: float = 0.0
    x_scale: float = 1.0
    min_observed: Optional[float] = None
    rss: Optional[float] = None
    bic: Optional[float] = None
    train_range: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if self.kind not in ("constant", "polynomial"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if not self.coefficients:
            raise ValueError("model needs at least one coefficient")
        if self.kind == "constant" and len(self.coefficients) != 1:
            raise ValueError("constant models take exactly one coefficient")
        if self.x_scale == 0:
            raise ValueError("x_scale must be nonzero")

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def evaluate_raw(self, n: float) -> float:
        """Un-clamped evaluation at block-height n."""
        if self.kind == "constant":
            return self.coefficients[0]
        x = (n - self.x_center) / self.x_scale
        value = 0.0
        for coeff in reversed(self.coefficients):
            value = value * x + coeff
        return value

    def evaluate(self, n: float) -> float:
        return extrapolate(self, n).value

    def scale(self, factor: float) -> "ScalarModel":
        """Model predicting factor * this; fit metadata does not carry over."""
        return ScalarModel(
            kind=self.kind,
            coefficients=tuple(c * factor for c in self.coefficients),
            x_center=self.x_center,
            x_scale=self.x_scale,
            min_observed=(None if self.min_observed is None
                          else self.min_observed * factor),
            train_range=self.train_range,
        )


class Extrapolation(NamedTuple):
    value: float
    clamped: bool


def extrapolate(model: ScalarModel, n: float) -> Extrapolation:
    """Evaluate at n; negative predictions clamp to the training minimum."""
    value = model.evaluate_raw(n)
    if value < 0:
        floor = model.min_observed if model.min_observed is not None else 0.0
        return Extrapolation(max(floor, 0.0), True)
    return Extrapolation(value, False)

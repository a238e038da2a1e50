"""Per-opcode time-model fitting with BIC degree selection.

Height-dependent opcodes get a least-squares polynomial (degree 1..3):
observations are the per-window mean times, split 80/20 into training and
validation by a seeded shuffle, and the degree minimizing the Bayesian
information criterion on the validation split wins. The criterion used is
m*ln(RSS/m) + k*ln(m) with m validation points and k coefficients; an
exact fit (RSS = 0) scores negative infinity, and ties break toward the
lower degree. Height-independent opcodes get their mean as a constant
model. Inputs are standardized before fitting so cubic fits at
million-block heights stay well conditioned.
"""

from __future__ import annotations

import json
import math
import random
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from ..metrics import WindowAggregate
from .base import FitError, InsufficientDataError, ScalarModel
from .classify import DEPENDENT, ClassificationResult, mean_time_series

MIN_FIT_WINDOWS = 10
DEFAULT_DEGREES = (1, 2, 3)
DEFAULT_SPLIT = 0.8


def bic_score(rss: float, n_points: int, n_coefficients: int) -> float:
    if n_points <= 0:
        raise ValueError("BIC needs at least one point")
    if rss <= 0:
        return float("-inf")
    return n_points * math.log(rss / n_points) + n_coefficients * math.log(n_points)


def _split_indices(n: int, split: float, seed: int) -> tuple[list[int], list[int]]:
    indices = list(range(n))
    random.Random(seed).shuffle(indices)
    cut = max(1, min(n - 1, int(round(n * split))))
    return sorted(indices[:cut]), sorted(indices[cut:])


def fit_time_model(windows: Sequence[WindowAggregate], opcode: str,
                   degrees: Iterable[int] = DEFAULT_DEGREES,
                   split: float = DEFAULT_SPLIT, seed: int = 0) -> ScalarModel:
    """Fit and select a polynomial time model for one opcode."""
    heights, means, _ = mean_time_series(windows, opcode)
    if len(heights) < MIN_FIT_WINDOWS:
        raise InsufficientDataError(
            f"{opcode}: {len(heights)} usable windows, need {MIN_FIT_WINDOWS}")
    if not 0 < split < 1:
        raise ValueError("split must be in (0, 1)")

    train_idx, val_idx = _split_indices(len(heights), split, seed)
    xs = np.asarray(heights, dtype=float)
    ys = np.asarray(means, dtype=float)

    center = float(xs[train_idx].mean())
    scale = float(xs[train_idx].std())
    if scale == 0:
        raise FitError(f"{opcode}: all training heights equal")
    xs_std = (xs - center) / scale

    best: tuple[float, int, tuple[float, ...], float] | None = None
    for degree in sorted(set(degrees)):
        if degree < 1:
            raise ValueError("polynomial degrees start at 1")
        if len(train_idx) < degree + 1:
            continue
        try:
            coeffs_desc = np.polyfit(xs_std[train_idx], ys[train_idx], degree)
        except np.linalg.LinAlgError as exc:
            raise FitError(f"{opcode}: singular fit: {exc}") from exc
        if not np.all(np.isfinite(coeffs_desc)):
            raise FitError(f"{opcode}: non-finite coefficients")
        residuals = ys[val_idx] - np.polyval(coeffs_desc, xs_std[val_idx])
        rss = float(np.dot(residuals, residuals))
        # Residuals at float-noise level are an exact fit; forcing them to
        # zero makes BIC -inf for every exact degree and lets the tie-break
        # pick the lowest one.
        if rss <= 1e-18 * max(1.0, float(np.dot(ys[val_idx], ys[val_idx]))):
            rss = 0.0
        score = bic_score(rss, len(val_idx), degree + 1)
        if best is None or (score, degree) < (best[0], best[1]):
            best = (score, degree, tuple(float(c) for c in coeffs_desc[::-1]),
                    rss)
    if best is None:
        raise InsufficientDataError(
            f"{opcode}: no candidate degree is fittable with "
            f"{len(train_idx)} training windows")

    score, _degree, coefficients, rss = best
    return ScalarModel(
        kind="polynomial",
        coefficients=coefficients,
        x_center=center,
        x_scale=scale,
        min_observed=float(ys.min()),
        rss=rss,
        bic=score,
        train_range=(float(xs.min()), float(xs.max())),
    )


def constant_model(windows: Sequence[WindowAggregate],
                   opcode: str) -> ScalarModel:
    """Mean-time constant model (used for height-independent opcodes)."""
    heights, means, _ = mean_time_series(windows, opcode)
    if not heights:
        raise InsufficientDataError(f"{opcode}: no usable windows")
    mean = sum(means) / len(means)
    return ScalarModel(
        kind="constant",
        coefficients=(mean,),
        min_observed=min(means),
        train_range=(min(heights), max(heights)),
    )


def build_time_models(windows: Sequence[WindowAggregate],
                      classification: ClassificationResult,
                      degrees: Iterable[int] = DEFAULT_DEGREES,
                      split: float = DEFAULT_SPLIT,
                      seed: int = 0) -> dict[str, ScalarModel]:
    """Models for every observed opcode.

    Dependent opcodes with enough windows get polynomial fits; everything
    else (independent, unclassifiable, or sparse) falls back to a constant.
    """
    opcodes = sorted({op for w in windows for op in w.instructions})
    models: dict[str, ScalarModel] = {}
    for op in opcodes:
        label = classification.labels.get(op)
        heights, _, _ = mean_time_series(windows, op)
        if label == DEPENDENT and len(heights) >= MIN_FIT_WINDOWS:
            models[op] = fit_time_model(windows, op, degrees, split, seed)
        elif heights:
            models[op] = constant_model(windows, op)
    return models


# ---------------------------------------------------------------------------
# JSON round-trip for fitted models
# ---------------------------------------------------------------------------

def models_to_json(models: Mapping[str, ScalarModel]) -> str:
    doc = {}
    for op in sorted(models):
        m = models[op]
        doc[op] = {
            "kind": m.kind,
            "coefficients": list(m.coefficients),
            "x_center": m.x_center,
            "x_scale": m.x_scale,
            "min_observed": m.min_observed,
            "rss": m.rss,
            "bic": m.bic,
            "train_range": list(m.train_range) if m.train_range else None,
        }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def models_from_json(text: str) -> dict[str, ScalarModel]:
    doc = json.loads(text)
    models = {}
    for op, entry in doc.items():
        models[op] = ScalarModel(
            kind=entry["kind"],
            coefficients=tuple(entry["coefficients"]),
            x_center=entry.get("x_center", 0.0),
            x_scale=entry.get("x_scale", 1.0),
            min_observed=entry.get("min_observed"),
            rss=entry.get("rss"),
            bic=entry.get("bic"),
            train_range=(tuple(entry["train_range"])
                         if entry.get("train_range") else None),
        )
    return models


def save_models(models: Mapping[str, ScalarModel], path: str | Path) -> None:
    Path(path).write_text(models_to_json(models))


def load_models(path: str | Path) -> dict[str, ScalarModel]:
    return models_from_json(Path(path).read_text())

"""Per-feature swing feedback from a trained additive model.

For every feature we evaluate its shape function over the observed training
range (1st-99th percentile: subnet tails beyond the data are untrustworthy),
attach a training-density histogram, pick the density-feasible grid point
with the best effect, and rank features for one golfer by how much moving
from their current value to that optimum would change the prediction.

Class convention: binary models in this package use "straight" as the
positive class, so for direction/spin targets the optimal value maximizes
the straight-class contribution; for ball speed it maximizes the raw
effect. Rankings treat features independently, which is exact for an
additive model. No causal claim is made by session comparisons; they report
deltas only.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .errors import DimensionMismatch, EmptyDataset, NoFeasibleRegion
from .models import AdditiveModel


@dataclass(frozen=True)
class ShapeCurve:
    """One shape function sampled on a raw-unit grid, plus training density."""

    feature: str
    xs: np.ndarray  # strictly increasing grid in raw units
    ys: np.ndarray  # centered f_i values
    bin_edges: np.ndarray  # len(xs) histogram edges? no: len = n_bins + 1
    bin_counts: np.ndarray  # training samples per bin

    def point_density(self) -> np.ndarray:
        """Training-sample count of the bin each grid point falls into.

        Grid point i is the left edge of bin i; the last point belongs to
        the final bin.
        """
        idx = np.minimum(np.arange(self.xs.size), self.bin_counts.size - 1)
        return self.bin_counts[idx]


MAXIMIZE_STRAIGHT = "maximize_straight_logit"
MAXIMIZE_OUTPUT = "maximize_output"


def default_density_floor(curve: ShapeCurve) -> float:
    """Bins holding at least 1% of the in-range training samples count as visited."""
    return 0.01 * float(curve.bin_counts.sum())


def extract_curves(
    model: AdditiveModel,
    train_features: np.ndarray,
    grid_size: int = 64,
) -> list[ShapeCurve]:
    """Sample every shape function over its observed training range.

    ``train_features`` is the raw-unit feature matrix the model was trained
    on (used for grid ranges and density histograms).
    """
    x = np.asarray(train_features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyDataset("extract_curves needs training features")
    if x.shape[1] != model.n_features:
        raise DimensionMismatch(
            f"{x.shape[1]} feature columns vs model with {model.n_features}"
        )
    if grid_size < 2:
        raise ValueError("grid size must be >= 2")
    names = model.feature_names or [f"feature-{i}" for i in range(model.n_features)]
    curves = []
    for i in range(model.n_features):
        col = x[:, i]
        lo, hi = np.percentile(col, [1.0, 99.0])
        if hi <= lo:  # constant (or near-constant) feature
            lo, hi = lo - 0.5, lo + 0.5
        grid = np.linspace(lo, hi, grid_size)
        _, ys = model.shape_function(i, grid)
        counts, edges = np.histogram(col, bins=grid)  # grid points as edges
        curves.append(
            ShapeCurve(
                feature=names[i],
                xs=grid,
                ys=ys,
                bin_edges=grid.copy(),
                bin_counts=counts.astype(np.float64),
            )
        )
    return curves


def optimal_value(
    curve: ShapeCurve,
    objective: str = MAXIMIZE_STRAIGHT,
    density_floor: float = 0.0,
) -> float:
    """Best raw feature value among grid points with enough training density.

    Both objectives maximize the curve (the straight class is the positive
    class, so a larger contribution always means a better outcome for the
    chosen target). Exact ties break toward the value nearest the density
    mode, then toward the smaller value.
    """
    if objective not in (MAXIMIZE_STRAIGHT, MAXIMIZE_OUTPUT):
        raise ValueError(f"unknown objective {objective!r}")
    if curve.xs.size == 0:
        raise EmptyDataset("empty curve")
    density = curve.point_density()
    feasible = np.flatnonzero(density >= density_floor)
    if feasible.size == 0:
        raise NoFeasibleRegion(
            f"{curve.feature}: density floor {density_floor} excludes all grid points"
        )
    ys = curve.ys[feasible]
    best = ys.max()
    candidates = feasible[ys == best]
    if candidates.size == 1:
        return float(curve.xs[candidates[0]])
    mode_x = curve.xs[int(np.argmax(density))]
    gaps = np.abs(curve.xs[candidates] - mode_x)
    nearest = candidates[gaps == gaps.min()]
    return float(curve.xs[nearest.min()])


@dataclass(frozen=True)
class FeedbackItem:
    feature: str
    current: float
    optimal: float
    effect_delta: float  # f_i(optimal) - f_i(current), model-output units
    rank: int

    @property
    def direction_text(self) -> str:
        verb = "increase" if self.optimal > self.current else "decrease"
        if self.optimal == self.current:
            verb = "keep"
        return (
            f"{verb} {self.feature} from {self.current:.3f} toward {self.optimal:.3f}"
        )

    def to_dict(self) -> dict:
        return {
            "feature": self.feature,
            "current": self.current,
            "optimal": self.optimal,
            "effect_delta": self.effect_delta,
            "rank": self.rank,
            "advice": self.direction_text,
        }


@dataclass(frozen=True)
class FeedbackReport:
    golfer_id: str
    target: str  # direction | spin | speed
    items: list[FeedbackItem]
    n_swings: int

    def to_dict(self) -> dict:
        return {
            "golfer_id": self.golfer_id,
            "target": self.target,
            "n_swings": self.n_swings,
            "items": [item.to_dict() for item in self.items],
            "notes": [
                "binary targets: effects are straight-class contributions",
                "features are ranked independently (additive model)",
            ],
        }


def generate_feedback(
    model: AdditiveModel,
    curves: Sequence[ShapeCurve],
    golfer_swings: np.ndarray,
    target: str,
    golfer_id: str = "",
    k: int = 5,
    density_floor: float | None = None,
) -> FeedbackReport:
    """Rank per-feature recommendations for one golfer.

    ``golfer_swings`` is a raw-unit (n_swings, d) matrix; the current value
    of each feature is its mean over the swings. Items are sorted by
    descending |effect_delta|, ties by feature name. ``density_floor=None``
    uses the 1%-of-train default per curve.
    """
    swings = np.asarray(golfer_swings, dtype=np.float64)
    if swings.ndim == 1:
        swings = swings[None, :]
    if swings.shape[0] == 0:
        raise EmptyDataset("no golfer swings")
    if swings.shape[1] != model.n_features or len(curves) != model.n_features:
        raise DimensionMismatch(
            f"swings {swings.shape} vs model with {model.n_features} features"
        )
    objective = MAXIMIZE_OUTPUT if target == "speed" else MAXIMIZE_STRAIGHT
    current = swings.mean(axis=0)
    items = []
    for i, curve in enumerate(curves):
        floor = default_density_floor(curve) if density_floor is None else density_floor
        optimal = optimal_value(curve, objective, floor)
        pair = np.array([current[i], optimal])
        _, f_pair = model.shape_function(i, pair)
        delta = float(f_pair[1] - f_pair[0])
        items.append((curve.feature, float(current[i]), float(optimal), delta))
    items.sort(key=lambda it: (-abs(it[3]), it[0]))
    ranked = [
        FeedbackItem(feature=f, current=c, optimal=o, effect_delta=d, rank=r + 1)
        for r, (f, c, o, d) in enumerate(items[: max(k, 0)])
    ]
    return FeedbackReport(
        golfer_id=golfer_id, target=target, items=ranked, n_swings=swings.shape[0]
    )


# --------------------------------------------------------------------------
# session comparison
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SessionComparison:
    """Before/after deltas for one golfer; descriptive only, not causal."""

    feature_names: list[str]
    before_means: np.ndarray
    after_means: np.ndarray
    before_lr_std: float
    after_lr_std: float
    before_mean_abs_direction: float
    after_mean_abs_direction: float
    n_before: int
    n_after: int

    @property
    def mean_shifts(self) -> np.ndarray:
        return self.after_means - self.before_means

    def to_dict(self) -> dict:
        return {
            "n_before": self.n_before,
            "n_after": self.n_after,
            "features": [
                {
                    "feature": name,
                    "before_mean": float(b),
                    "after_mean": float(a),
                    "shift": float(a - b),
                }
                for name, b, a in zip(
                    self.feature_names, self.before_means, self.after_means
                )
            ],
            "lr_distance_out_std": {
                "before": self.before_lr_std,
                "after": self.after_lr_std,
            },
            "mean_abs_direction_angle": {
                "before": self.before_mean_abs_direction,
                "after": self.after_mean_abs_direction,
            },
        }


def compare_sessions(
    before_balls,
    before_features: np.ndarray,
    after_balls,
    after_features: np.ndarray,
    feature_names: list[str],
) -> SessionComparison:
    """Per-feature mean shifts and dispersion statistics across two sessions."""
    fb = np.atleast_2d(np.asarray(before_features, dtype=np.float64))
    fa = np.atleast_2d(np.asarray(after_features, dtype=np.float64))
    if len(before_balls) == 0 or len(after_balls) == 0:
        raise EmptyDataset("both sessions need at least one ball record")
    if fb.shape[0] == 0 or fa.shape[0] == 0:
        raise EmptyDataset("both sessions need at least one feature vector")
    if fb.shape[1] != fa.shape[1] or fb.shape[1] != len(feature_names):
        raise DimensionMismatch("before/after feature dimensions differ")
    return SessionComparison(
        feature_names=list(feature_names),
        before_means=fb.mean(axis=0),
        after_means=fa.mean(axis=0),
        before_lr_std=float(np.std([b.lr_distance_out for b in before_balls])),
        after_lr_std=float(np.std([b.lr_distance_out for b in after_balls])),
        before_mean_abs_direction=float(
            np.mean([abs(b.direction_angle) for b in before_balls])
        ),
        after_mean_abs_direction=float(
            np.mean([abs(b.direction_angle) for b in after_balls])
        ),
        n_before=len(before_balls),
        n_after=len(after_balls),
    )


# --------------------------------------------------------------------------
# rendering
# --------------------------------------------------------------------------

_SVG_W, _SVG_H = 480, 320
_MARGIN = 48


def _map_x(x: float, lo: float, hi: float) -> float:
    span = hi - lo if hi > lo else 1.0
    return _MARGIN + (x - lo) / span * (_SVG_W - 2 * _MARGIN)


def _map_y(y: float, lo: float, hi: float) -> float:
    span = hi - lo if hi > lo else 1.0
    return _SVG_H - _MARGIN - (y - lo) / span * (_SVG_H - 2 * _MARGIN)


def render_curve_svg(curve: ShapeCurve, optimal_marker: float | None = None) -> str:
    """Render one shape curve as a self-contained SVG document.

    Layout: feature value on x, effect on y, grayscale density bands in the
    background (darker = more training samples), the curve as a polyline,
    and an optional red vertical marker at the recommended value.
    """
    xs, ys = curve.xs, curve.ys
    x_lo, x_hi = float(xs.min()), float(xs.max())
    y_lo, y_hi = float(ys.min()), float(ys.max())
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
    pad = 0.08 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" height="{_SVG_H}" '
        f'viewBox="0 0 {_SVG_W} {_SVG_H}">',
        f'<rect x="0" y="0" width="{_SVG_W}" height="{_SVG_H}" fill="white"/>',
    ]

    max_count = float(curve.bin_counts.max()) if curve.bin_counts.size else 0.0
    if max_count > 0:
        for i, count in enumerate(curve.bin_counts):
            if count <= 0:
                continue
            x0 = _map_x(float(curve.bin_edges[i]), x_lo, x_hi)
            x1 = _map_x(float(curve.bin_edges[i + 1]), x_lo, x_hi)
            shade = int(255 - 115 * (count / max_count))  # darker = denser
            parts.append(
                f'<rect x="{x0:.2f}" y="{_MARGIN}" width="{x1 - x0:.2f}" '
                f'height="{_SVG_H - 2 * _MARGIN}" '
                f'fill="rgb({shade},{shade},{shade})"/>'
            )

    # axes
    x_axis_y = _map_y(0.0, y_lo, y_hi) if y_lo < 0.0 < y_hi else _SVG_H - _MARGIN
    parts.append(
        f'<line x1="{_MARGIN}" y1="{x_axis_y:.2f}" x2="{_SVG_W - _MARGIN}" '
        f'y2="{x_axis_y:.2f}" stroke="#888" stroke-width="1"/>'
    )
    parts.append(
        f'<line x1="{_MARGIN}" y1="{_MARGIN}" x2="{_MARGIN}" '
        f'y2="{_SVG_H - _MARGIN}" stroke="#888" stroke-width="1"/>'
    )
    for frac in (0.0, 0.5, 1.0):
        xv = x_lo + frac * (x_hi - x_lo)
        yv = y_lo + frac * (y_hi - y_lo)
        parts.append(
            f'<text x="{_map_x(xv, x_lo, x_hi):.2f}" y="{_SVG_H - _MARGIN + 16}" '
            f'font-size="10" text-anchor="middle">{xv:.3g}</text>'
        )
        parts.append(
            f'<text x="{_MARGIN - 6}" y="{_map_y(yv, y_lo, y_hi):.2f}" '
            f'font-size="10" text-anchor="end">{yv:.3g}</text>'
        )

    points = " ".join(
        f"{_map_x(float(x), x_lo, x_hi):.2f},{_map_y(float(y), y_lo, y_hi):.2f}"
        for x, y in zip(xs, ys)
    )
    parts.append(
        f'<polyline points="{points}" fill="none" stroke="black" '
        'stroke-width="1.5" stroke-dasharray="4 3"/>'
    )

    if optimal_marker is not None and math.isfinite(optimal_marker):
        mx = _map_x(float(optimal_marker), x_lo, x_hi)
        parts.append(
            f'<line x1="{mx:.2f}" y1="{_MARGIN}" x2="{mx:.2f}" '
            f'y2="{_SVG_H - _MARGIN}" stroke="red" stroke-width="1.5"/>'
        )

    parts.append(
        f'<text x="{_SVG_W / 2:.0f}" y="20" font-size="13" text-anchor="middle">'
        f"{escape(curve.feature)}</text>"
    )
    parts.append("</svg>")
    return "\n".join(parts)


def export_curves_csv(curves: Sequence[ShapeCurve], path: str) -> None:
    """Write all curves as rows of feature,x,f,density_bin_count."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["feature", "x", "f", "density_bin_count"])
        for curve in curves:
            density = curve.point_density()
            for x, y, c in zip(curve.xs, curve.ys, density):
                writer.writerow([curve.feature, repr(float(x)), repr(float(y)), int(c)])

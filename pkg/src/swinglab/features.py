"""Phase-indexed feature vectors, outcome labels, and shot-shape taxonomy.

A feature is one (metric, event) pair named ``"<event_index>-<METRIC-NAME>"``
(so ``2-HEAD-LOC`` is head movement at Backswing). The default face-on
schema has exactly 40 entries; the default DTL schema has 30. Both can be
overridden with a JSON config file: a top-level array of
``{"metric": "HEAD-LOC", "event": 2}`` objects.
"""

from __future__ import annotations

import csv
import enum
import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyDataset,
    LengthMismatch,
    MalformedFile,
    MissingMetric,
    ZeroVariance,
)
from .metrics import MetricId, MetricValue, metric_from_name
from .pose_io import BallRecord, SwingEvent, View

_E = SwingEvent

# Default face-on schema: 40 features. Setup geometry is read at Address;
# head/shoulder/hip tracking runs through Impact; weight transfer and
# hanging-back indicators cover Impact through Finish.
_DEFAULT_FACEON: tuple[tuple[MetricId, SwingEvent], ...] = (
    (MetricId.STANCE_RATIO, _E.ADDRESS),
    (MetricId.UPPER_TILT, _E.ADDRESS),
    (MetricId.SHOULDER_ANGLE, _E.ADDRESS),
    (MetricId.HEAD_LOC, _E.TAKEAWAY),
    (MetricId.SHOULDER_ANGLE, _E.TAKEAWAY),
    (MetricId.HIP_ROTATION, _E.TAKEAWAY),
    (MetricId.HIP_SHIFTED, _E.TAKEAWAY),
    (MetricId.LEFT_ARM_ANGLE, _E.TAKEAWAY),
    (MetricId.HEAD_LOC, _E.BACKSWING),
    (MetricId.SHOULDER_LOC, _E.BACKSWING),
    (MetricId.SHOULDER_ANGLE, _E.BACKSWING),
    (MetricId.HIP_ROTATION, _E.BACKSWING),
    (MetricId.HIP_SHIFTED, _E.BACKSWING),
    (MetricId.LEFT_ARM_ANGLE, _E.BACKSWING),
    (MetricId.HEAD_LOC, _E.TOP),
    (MetricId.SHOULDER_ANGLE, _E.TOP),
    (MetricId.HIP_ROTATION, _E.TOP),
    (MetricId.HIP_SHIFTED, _E.TOP),
    (MetricId.LEFT_ARM_ANGLE, _E.TOP),
    (MetricId.RIGHT_ARM_ANGLE, _E.TOP),
    (MetricId.RIGHT_ARMPIT_ANGLE, _E.TOP),
    (MetricId.HEAD_LOC, _E.DOWNSWING),
    (MetricId.SHOULDER_ANGLE, _E.DOWNSWING),
    (MetricId.HIP_ROTATION, _E.DOWNSWING),
    (MetricId.HIP_SHIFTED, _E.DOWNSWING),
    (MetricId.RIGHT_ARM_ANGLE, _E.DOWNSWING),
    (MetricId.HEAD_LOC, _E.IMPACT),
    (MetricId.SHOULDER_ANGLE, _E.IMPACT),
    (MetricId.SHOULDER_LOC, _E.IMPACT),
    (MetricId.HIP_ROTATION, _E.IMPACT),
    (MetricId.HIP_SHIFTED, _E.IMPACT),
    (MetricId.WEIGHT_SHIFT, _E.IMPACT),
    (MetricId.RIGHT_LEG_ANGLE, _E.IMPACT),
    (MetricId.WEIGHT_SHIFT, _E.FOLLOW_THROUGH),
    (MetricId.SHOULDER_HANGING_BACK, _E.FOLLOW_THROUGH),
    (MetricId.HIP_HANGING_BACK, _E.FOLLOW_THROUGH),
    (MetricId.RIGHT_ARM_ANGLE, _E.FOLLOW_THROUGH),
    (MetricId.FINISH_ANGLE, _E.FINISH),
    (MetricId.SHOULDER_HANGING_BACK, _E.FINISH),
    (MetricId.HIP_HANGING_BACK, _E.FINISH),
)

_DEFAULT_DTL: tuple[tuple[MetricId, SwingEvent], ...] = (
    (MetricId.SPINE_ANGLE, _E.ADDRESS),
    (MetricId.LOWER_ANGLE, _E.ADDRESS),
    (MetricId.DTL_SHOULDER_ANGLE, _E.ADDRESS),
    (MetricId.SPINE_ANGLE, _E.TAKEAWAY),
    (MetricId.DTL_LEFT_ARM_ANGLE, _E.TAKEAWAY),
    (MetricId.HIP_ANGLE, _E.TAKEAWAY),
    (MetricId.SPINE_ANGLE, _E.BACKSWING),
    (MetricId.DTL_LEFT_ARM_ANGLE, _E.BACKSWING),
    (MetricId.HIP_ANGLE, _E.BACKSWING),
    (MetricId.HIP_LINE, _E.BACKSWING),
    (MetricId.SPINE_ANGLE, _E.TOP),
    (MetricId.DTL_LEFT_ARM_ANGLE, _E.TOP),
    (MetricId.DTL_RIGHT_ARM_ANGLE, _E.TOP),
    (MetricId.HIP_ANGLE, _E.TOP),
    (MetricId.RIGHT_DISTANCE, _E.TOP),
    (MetricId.SPINE_ANGLE, _E.DOWNSWING),
    (MetricId.HIP_LINE, _E.DOWNSWING),
    (MetricId.HIP_ANGLE, _E.DOWNSWING),
    (MetricId.RIGHT_DISTANCE, _E.DOWNSWING),
    (MetricId.SPINE_ANGLE, _E.IMPACT),
    (MetricId.DTL_SHOULDER_ANGLE, _E.IMPACT),
    (MetricId.HIP_LINE, _E.IMPACT),
    (MetricId.LOWER_ANGLE, _E.IMPACT),
    (MetricId.LEFT_LEG_ANGLE, _E.IMPACT),
    (MetricId.DTL_SHOULDER_ANGLE, _E.FOLLOW_THROUGH),
    (MetricId.HIP_LINE, _E.FOLLOW_THROUGH),
    (MetricId.LEFT_LEG_ANGLE, _E.FOLLOW_THROUGH),
    (MetricId.SPINE_ANGLE, _E.FINISH),
    (MetricId.LEFT_LEG_ANGLE, _E.FINISH),
    (MetricId.HIP_LINE, _E.FINISH),
)


def feature_name(metric: MetricId, event: SwingEvent) -> str:
    return f"{event.value}-{metric.display}"


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered (metric, event) pairs defining one feature vector layout."""

    view: View
    entries: tuple[tuple[MetricId, SwingEvent], ...]

    def __post_init__(self) -> None:
        if len(set(self.entries)) != len(self.entries):
            raise ValueError("schema contains duplicate (metric, event) pairs")
        for metric, _ in self.entries:
            if metric.view is not self.view:
                raise ValueError(
                    f"metric {metric.name} does not belong to view {self.view.value}"
                )

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def names(self) -> list[str]:
        return [feature_name(m, e) for m, e in self.entries]

    @property
    def fingerprint(self) -> str:
        digest = hashlib.sha256(
            (self.view.value + "|" + ",".join(self.names)).encode()
        )
        return digest.hexdigest()[:16]


def default_schema(view: View) -> FeatureSchema:
    entries = _DEFAULT_FACEON if view is View.FACEON else _DEFAULT_DTL
    return FeatureSchema(view, entries)


def load_schema(path: str, view: View) -> FeatureSchema:
    """Load a schema override file: array of {"metric": str, "event": 0-7}."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedFile(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(raw, list):
        raise MalformedFile(f"{path}: expected a top-level array")
    entries = []
    for i, obj in enumerate(raw):
        if not isinstance(obj, dict) or "metric" not in obj or "event" not in obj:
            raise MalformedFile(f"{path} entry {i}: need 'metric' and 'event'")
        try:
            metric = metric_from_name(str(obj["metric"]), view)
            event = SwingEvent(int(obj["event"]))
        except (KeyError, ValueError) as exc:
            raise MalformedFile(f"{path} entry {i}: {exc}") from exc
        entries.append((metric, event))
    return FeatureSchema(view, tuple(entries))


@dataclass(frozen=True)
class FeatureVector:
    swing_id: str
    values: np.ndarray  # aligned to a FeatureSchema, finite

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "values", np.asarray(self.values, dtype=np.float64)
        )


def assemble(metric_values: list[MetricValue], schema: FeatureSchema, swing_id: str) -> FeatureVector:
    """Select schema entries from a metric dump, in schema order.

    A missing (metric, event) pair raises MissingMetric; nothing is imputed.
    """
    table = {(mv.metric, mv.event): mv.value for mv in metric_values}
    values = np.empty(len(schema), dtype=np.float64)
    for i, (metric, event) in enumerate(schema.entries):
        try:
            values[i] = table[(metric, event)]
        except KeyError:
            raise MissingMetric(
                f"swing {swing_id!r}: no value for {feature_name(metric, event)}"
            ) from None
    return FeatureVector(swing_id, values)


# --------------------------------------------------------------------------
# labels and shot shape
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LabelPolicy:
    """Straight-shot thresholds in degrees; the boundary itself is straight."""

    direction_threshold: float = 6.0
    spin_threshold: float = 10.0

    def __post_init__(self) -> None:
        if self.direction_threshold <= 0 or self.spin_threshold <= 0:
            raise ValueError("thresholds must be > 0")


def label_direction(angle: float, policy: LabelPolicy = LabelPolicy()) -> bool:
    """True when the launch direction counts as straight (|angle| <= threshold)."""
    return abs(angle) <= policy.direction_threshold


def label_spin(axis: float, policy: LabelPolicy = LabelPolicy()) -> bool:
    """True when the spin-axis tilt counts as straight (|axis| <= threshold)."""
    return abs(axis) <= policy.spin_threshold


class StartShape(enum.Enum):
    PULL = "pull"
    STRAIGHT = "straight"
    PUSH = "push"


class CurveShape(enum.Enum):
    HOOK = "hook"
    STRAIGHT = "straight"
    SLICE = "slice"


@dataclass(frozen=True)
class ShotShape:
    start: StartShape
    curve: CurveShape


def shot_shape(ball: BallRecord, policy: LabelPolicy = LabelPolicy()) -> ShotShape:
    """Classify a shot: start left/straight/right and curve left/straight/right.

    Negative direction angle = starts left (pull); negative spin-axis tilt
    curves the ball left (hook), positive curves it right (slice).
    """
    if ball.direction_angle < -policy.direction_threshold:
        start = StartShape.PULL
    elif ball.direction_angle > policy.direction_threshold:
        start = StartShape.PUSH
    else:
        start = StartShape.STRAIGHT
    if ball.spin_axis < -policy.spin_threshold:
        curve = CurveShape.HOOK
    elif ball.spin_axis > policy.spin_threshold:
        curve = CurveShape.SLICE
    else:
        curve = CurveShape.STRAIGHT
    return ShotShape(start, curve)


# --------------------------------------------------------------------------
# standardization and correlation
# --------------------------------------------------------------------------

@dataclass
class Standardizer:
    """Per-feature zero-mean/unit-variance transform fit on training data.

    Uses population (1/N) standard deviation. Constant columns are flagged
    and passed through unchanged.
    """

    means: np.ndarray
    stds: np.ndarray
    constant_mask: np.ndarray = field(repr=False)

    @classmethod
    def fit(cls, train_matrix: np.ndarray) -> "Standardizer":
        x = np.asarray(train_matrix, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] < 2:
            raise EmptyDataset("standardization needs at least 2 training vectors")
        means = x.mean(axis=0)
        stds = x.std(axis=0)  # population convention
        constant = stds == 0.0
        return cls(means=means, stds=stds, constant_mask=constant)

    @property
    def n_features(self) -> int:
        return self.means.shape[0]

    def transform(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        divisor = np.where(self.constant_mask, 1.0, self.stds)
        return (x - self.means) / divisor

    def inverse_transform(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=np.float64)
        divisor = np.where(self.constant_mask, 1.0, self.stds)
        return z * divisor + self.means

    def to_dict(self) -> dict:
        return {
            "means": self.means.tolist(),
            "stds": self.stds.tolist(),
            "constant_mask": self.constant_mask.astype(int).tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Standardizer":
        return cls(
            means=np.asarray(d["means"], dtype=np.float64),
            stds=np.asarray(d["stds"], dtype=np.float64),
            constant_mask=np.asarray(d["constant_mask"], dtype=bool),
        )


def standardize(train_vectors: list[FeatureVector]) -> Standardizer:
    """Fit a Standardizer on training feature vectors (train side only)."""
    if len(train_vectors) < 2:
        raise EmptyDataset("standardization needs at least 2 training vectors")
    matrix = np.stack([fv.values for fv in train_vectors])
    return Standardizer.fit(matrix)


def pearson(xs, ys) -> float:
    """Pearson product-moment correlation of two equal-length sequences."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"shapes {x.shape} and {y.shape} differ")
    if x.size < 2:
        raise LengthMismatch("need at least 2 points")
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float(xc @ xc) * float(yc @ yc))
    if denom == 0.0:
        raise ZeroVariance("constant input sequence")
    return float(xc @ yc) / denom


# --------------------------------------------------------------------------
# feature matrix CSV
# --------------------------------------------------------------------------

def write_feature_csv(
    path: str,
    vectors: list[FeatureVector],
    names: list[str],
    extra_columns: dict[str, dict[str, str]] | None = None,
) -> None:
    """Write a feature matrix: header ``swing_id,<names...>[,extras...]``.

    ``extra_columns`` maps column name -> {swing_id: cell}; missing cells
    are left empty.
    """
    extras = extra_columns or {}
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["swing_id"] + names + list(extras))
        for fv in vectors:
            row = [fv.swing_id] + [repr(float(v)) for v in fv.values]
            row += [extras[col].get(fv.swing_id, "") for col in extras]
            writer.writerow(row)


def read_feature_csv(path: str) -> tuple[list[FeatureVector], list[str]]:
    """Read a feature matrix written by ``write_feature_csv``.

    Returns (vectors, feature names). Trailing non-numeric/pairing columns
    are ignored; every kept column must parse as a float for every row.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedFile(f"{path}: empty file") from None
        if not header or header[0] != "swing_id":
            raise MalformedFile(f"{path}: first column must be 'swing_id'")
        names = header[1:]
        rows = [row for row in reader if row and any(c.strip() for c in row)]
    # pairing columns appended by `extract --balls` are not features
    non_feature = {"direction_angle", "spin_axis", "ball_speed"}
    keep = [i for i, n in enumerate(names) if n not in non_feature]
    vectors = []
    for row_no, row in enumerate(rows, start=1):
        if len(row) != len(names) + 1:
            raise MalformedFile(f"{path} row {row_no}: wrong field count")
        try:
            values = np.array([float(row[1 + i]) for i in keep], dtype=np.float64)
        except ValueError:
            raise MalformedFile(f"{path} row {row_no}: non-numeric feature") from None
        vectors.append(FeatureVector(row[0], values))
    return vectors, [names[i] for i in keep]

"""Scoring metrics, the benchmark harness, and the synthetic-data generator.

The benchmark reproduces the evaluation protocol end to end: one seeded
train/test split, standardization fit on train only, a linear model and an
additive model per target (launch-direction straightness, spin-axis
straightness, ball speed), and Acc/AUC or MSE on the held-out test side.
Binary targets use "straight" as the positive class.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateLabels, EmptyDataset, LengthMismatch
from .features import (
    FeatureSchema,
    FeatureVector,
    LabelPolicy,
    Standardizer,
    assemble,
    label_direction,
    label_spin,
    pearson,
)
from .metrics import compute_all
from .models import (
    AdditiveModel,
    LinearModel,
    Task,
    TrainingConfig,
    train_linear,
    train_nam,
)
from .pose_io import BallRecord, PairedShot, normalize_sequence, split_dataset

TARGETS = ("direction", "spin", "speed")


def accuracy(predictions, labels) -> float:
    """Fraction of probability predictions on the correct side of 0.5.

    A prediction of exactly 0.5 classifies as positive.
    """
    p = np.asarray(predictions, dtype=np.float64)
    y = np.asarray(labels)
    if p.shape != y.shape or p.ndim != 1 or p.size == 0:
        raise LengthMismatch(f"shapes {p.shape} and {y.shape}")
    return float(np.mean((p >= 0.5) == (y.astype(bool))))


def auc(scores, labels) -> float:
    """Area under the ROC curve, by the Mann-Whitney rank statistic.

    Equals the probability that a random positive outscores a random
    negative, counting ties as 1/2. Raises DegenerateLabels when only one
    class is present.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels).astype(bool)
    if s.shape != y.shape or s.ndim != 1:
        raise LengthMismatch(f"shapes {s.shape} and {y.shape}")
    n_pos = int(y.sum())
    n_neg = int(y.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabels("AUC needs both classes present")
    order = np.argsort(s, kind="stable")
    ranks = np.empty(s.size, dtype=np.float64)
    sorted_scores = s[order]
    i = 0
    while i < s.size:
        j = i
        while j + 1 < s.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0  # average 1-based rank
        i = j + 1
    u = float(ranks[y].sum()) - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def mse(predictions, targets) -> float:
    """Mean squared error."""
    p = np.asarray(predictions, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    if p.shape != t.shape or p.ndim != 1 or p.size == 0:
        raise LengthMismatch(f"shapes {p.shape} and {t.shape}")
    return float(np.mean((p - t) ** 2))


# --------------------------------------------------------------------------
# benchmark harness
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EvalReport:
    task: str  # direction | spin | speed
    model: str  # linear | nam
    n_train: int
    n_test: int
    seed: int
    accuracy: float | None = None
    auc: float | None = None
    mse: float | None = None

    def to_dict(self) -> dict:
        d = {
            "task": self.task,
            "model": self.model,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "seed": self.seed,
        }
        if self.task == "speed":
            d["mse"] = self.mse
        else:
            d["accuracy"] = self.accuracy
            d["auc"] = self.auc
        return d


@dataclass(frozen=True)
class BenchmarkResult:
    reports: list[EvalReport]
    skipped: list[dict]  # {"task", "model", "reason"}

    def to_dict(self) -> dict:
        return {
            "reports": [r.to_dict() for r in self.reports],
            "skipped": self.skipped,
        }


def _target_values(balls: Sequence[BallRecord], target: str, policy: LabelPolicy) -> np.ndarray:
    if target == "direction":
        return np.array([float(label_direction(b.direction_angle, policy)) for b in balls])
    if target == "spin":
        return np.array([float(label_spin(b.spin_axis, policy)) for b in balls])
    if target == "speed":
        return np.array([b.ball_speed for b in balls])
    raise ValueError(f"unknown target {target!r}")


def benchmark_features(
    x: np.ndarray,
    feature_names: list[str],
    balls: Sequence[BallRecord],
    policy: LabelPolicy = LabelPolicy(),
    linear_config: TrainingConfig | None = None,
    nam_config: TrainingConfig | None = None,
    seed: int = 42,
    train_fraction: float = 0.8,
) -> BenchmarkResult:
    """Run the benchmark protocol on an already-built feature matrix."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != len(balls):
        raise LengthMismatch(f"{x.shape[0]} feature rows vs {len(balls)} ball records")
    if x.shape[0] < 10:
        raise EmptyDataset("benchmark needs at least 10 shots")
    linear_config = linear_config or TrainingConfig(seed=seed)
    nam_config = nam_config or TrainingConfig(seed=seed)

    idx_train, idx_test = split_dataset(list(range(x.shape[0])), train_fraction, seed)
    x_train, x_test = x[idx_train], x[idx_test]
    balls_train = [balls[i] for i in idx_train]
    balls_test = [balls[i] for i in idx_test]
    standardizer = Standardizer.fit(x_train)

    trainers: dict[str, Callable] = {"linear": train_linear, "nam": train_nam}
    reports: list[EvalReport] = []
    skipped: list[dict] = []
    for target in TARGETS:
        task = Task.REGRESSION if target == "speed" else Task.BINARY
        y_train = _target_values(balls_train, target, policy)
        y_test = _target_values(balls_test, target, policy)
        if task is Task.BINARY and (
            len(np.unique(y_train)) < 2 or len(np.unique(y_test)) < 2
        ):
            for model_name in trainers:
                skipped.append(
                    {
                        "task": target,
                        "model": model_name,
                        "reason": "single class after split (DegenerateLabels)",
                    }
                )
            continue
        for model_name, trainer in trainers.items():
            cfg = linear_config if model_name == "linear" else nam_config
            model = trainer(
                x_train, y_train, task, cfg,
                standardizer=standardizer, feature_names=feature_names,
            )
            preds = model.predict(x_test)
            if task is Task.BINARY:
                reports.append(
                    EvalReport(
                        task=target,
                        model=model_name,
                        n_train=len(idx_train),
                        n_test=len(idx_test),
                        seed=seed,
                        accuracy=accuracy(preds, y_test),
                        auc=auc(preds, y_test),
                    )
                )
            else:
                reports.append(
                    EvalReport(
                        task=target,
                        model=model_name,
                        n_train=len(idx_train),
                        n_test=len(idx_test),
                        seed=seed,
                        mse=mse(preds, y_test),
                    )
                )
    return BenchmarkResult(reports, skipped)


def benchmark(
    shots: Sequence[PairedShot],
    schema: FeatureSchema,
    policy: LabelPolicy = LabelPolicy(),
    linear_config: TrainingConfig | None = None,
    nam_config: TrainingConfig | None = None,
    seed: int = 42,
    train_fraction: float = 0.8,
) -> BenchmarkResult:
    """Full protocol from paired shots: extract features, split, train, score."""
    vectors = []
    for shot in shots:
        seq = normalize_sequence(shot.sequence)
        vectors.append(assemble(compute_all(seq), schema, seq.swing_id))
    x = np.stack([fv.values for fv in vectors])
    balls = [shot.ball for shot in shots]
    return benchmark_features(
        x, schema.names, balls, policy, linear_config, nam_config, seed, train_fraction
    )


def correlation_table(
    x: np.ndarray, feature_names: list[str], ball_values: Sequence[float]
) -> list[tuple[str, float | None]]:
    """Pearson r of every feature column against one ball quantity.

    Constant columns are reported as None (undefined) rather than an error.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(ball_values, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise EmptyDataset("correlation needs at least 2 rows")
    if x.shape[0] != y.shape[0]:
        raise LengthMismatch(f"{x.shape[0]} rows vs {y.shape[0]} ball values")
    out: list[tuple[str, float | None]] = []
    for i, name in enumerate(feature_names):
        col = x[:, i]
        if np.all(col == col[0]) or np.all(y == y[0]):
            out.append((name, None))
        else:
            out.append((name, pearson(col, y)))
    return out


# --------------------------------------------------------------------------
# synthetic data with known generative truth
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TruthFeature:
    """One ground-truth additive component g_i over a uniform feature range."""

    kind: str  # linear | quadratic | sine | step_smooth | zero
    scale: float = 1.0
    rate: float = 1.0
    low: float = -2.0
    high: float = 2.0

    def g(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "linear":
            return self.scale * x
        if self.kind == "quadratic":
            return self.scale * x**2
        if self.kind == "sine":
            return self.scale * np.sin(self.rate * x)
        if self.kind == "step_smooth":
            return self.scale * np.tanh(self.rate * x)
        if self.kind == "zero":
            return np.zeros_like(x)
        raise ValueError(f"unknown truth kind {self.kind!r}")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "scale": self.scale,
            "rate": self.rate,
            "low": self.low,
            "high": self.high,
        }


@dataclass(frozen=True)
class SyntheticDataset:
    features: np.ndarray  # (n, d)
    y_regression: np.ndarray  # noiseless sum + bias + gaussian noise
    y_binary: np.ndarray  # noiseless sum thresholded at its median
    noiseless: np.ndarray
    bias: float
    truths: tuple[TruthFeature, ...]
    feature_names: tuple[str, ...]


def generate_synthetic(
    seed: int,
    n: int,
    truths: Sequence[TruthFeature],
    noise_std: float = 0.1,
    bias: float = 0.0,
) -> SyntheticDataset:
    """Draw a dataset from a known additive ground truth.

    Features are uniform on each truth's [low, high); the regression target
    is sum_i g_i(x_i) + bias + N(0, noise_std); the binary target thresholds
    the noiseless sum at its median (so both classes are present).
    """
    if n < 10:
        raise EmptyDataset("synthetic generation needs n >= 10")
    rng = np.random.default_rng(seed)
    cols = [rng.uniform(t.low, t.high, size=n) for t in truths]
    x = np.column_stack(cols)
    noiseless = np.zeros(n)
    for i, t in enumerate(truths):
        noiseless += t.g(x[:, i])
    noise = rng.normal(0.0, noise_std, size=n) if noise_std > 0 else np.zeros(n)
    y_reg = noiseless + bias + noise
    y_bin = (noiseless >= np.median(noiseless)).astype(np.float64)
    names = tuple(f"SYN-{i}-{t.kind.upper()}" for i, t in enumerate(truths))
    return SyntheticDataset(
        features=x,
        y_regression=y_reg,
        y_binary=y_bin,
        noiseless=noiseless,
        bias=bias,
        truths=tuple(truths),
        feature_names=names,
    )


DEFAULT_TRUTHS: tuple[TruthFeature, ...] = (
    TruthFeature("linear", scale=1.0),
    TruthFeature("quadratic", scale=1.0),
    TruthFeature("sine", scale=1.0, rate=2.0),
    TruthFeature("step_smooth", scale=1.0, rate=2.0),
    TruthFeature("zero"),
)

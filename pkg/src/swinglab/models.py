"""Interpretable predictors: ridge/logistic linear models and additive models.

The additive model predicts ``y = f_1(x_1) + ... + f_d(x_d) + beta`` where
each shape function f_i is a small per-feature MLP (default 1 -> 64 -> 32
-> 1) with softplus hidden activations. Binary tasks apply the logistic
link to that sum; the positive class is "straight" throughout the package.

Training is plain mini-batch gradient descent with manual backpropagation,
an L2 penalty on weight matrices, and an output penalty on the mean of
``sum_i f_i(x)^2`` (discourages mutually cancelling shape functions). The
configured learning rate is divided by the feature count (every subnet sees
the full residual, so the prediction-space step otherwise grows with d) and
follows a cosine schedule down to 1% of the base rate. All randomness
(initialization, batch shuffling) flows from one seed through a numpy PCG64
generator, so identical seed + config + data reproduce bit-identical
models. After training each shape function is re-centered to mean zero over
the training set, with the removed means folded into beta, so curves from
different features share a common baseline.

Models are immutable once trained and safe for concurrent prediction.
Public prediction surfaces take features in raw units; the stored
standardization transform (when present) is applied internally.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CorruptFile,
    DimensionMismatch,
    EmptyDataset,
    IndexOutOfRange,
    NonFiniteLoss,
    SingularSystem,
    VersionMismatch,
)
from .features import Standardizer

MODEL_FILE_VERSION = 1


class Task(enum.Enum):
    REGRESSION = "regression"
    BINARY = "binary"


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float = 0.05
    epochs: int = 400
    batch_size: int = 128
    l2_penalty: float = 1e-5
    output_penalty: float = 1e-4
    seed: int = 42
    hidden_sizes: tuple[int, ...] = (64, 32)

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs <= 0 or self.batch_size <= 0:
            raise ValueError("epochs and batch_size must be > 0")
        if self.l2_penalty < 0 or self.output_penalty < 0:
            raise ValueError("penalties must be >= 0")
        if not self.hidden_sizes or any(h <= 0 for h in self.hidden_sizes):
            raise ValueError("hidden_sizes must be positive")


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softplus(z: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, z)


def _as_matrix(x: np.ndarray, n_features: int, what: str) -> tuple[np.ndarray, bool]:
    """Coerce input to (n, d); returns (matrix, was_single_vector)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        if x.shape[0] != n_features:
            raise DimensionMismatch(
                f"{what}: expected {n_features} features, got {x.shape[0]}"
            )
        return x[None, :], True
    if x.ndim != 2 or x.shape[1] != n_features:
        raise DimensionMismatch(
            f"{what}: expected (n, {n_features}) matrix, got {x.shape}"
        )
    return x, False


# --------------------------------------------------------------------------
# linear models
# --------------------------------------------------------------------------

@dataclass
class LinearModel:
    """Weights + bias; regression or logistic-link binary classifier."""

    task: Task
    weights: np.ndarray
    bias: float
    standardizer: Standardizer | None = None
    feature_names: list[str] | None = None
    schema_fingerprint: str | None = None

    @property
    def n_features(self) -> int:
        return self.weights.shape[0]

    def decision_function(self, x: np.ndarray):
        """Pre-link score w.x + b for raw-unit input."""
        x, single = _as_matrix(x, self.n_features, "predict")
        if self.standardizer is not None:
            x = self.standardizer.transform(x)
        z = x @ self.weights + self.bias
        return float(z[0]) if single else z

    def predict(self, x: np.ndarray):
        """Regression value, or straight-class probability for binary."""
        z = self.decision_function(x)
        if self.task is Task.BINARY:
            return float(_sigmoid(np.array([z]))[0]) if np.isscalar(z) else _sigmoid(z)
        return z


def train_linear(
    x: np.ndarray,
    y: np.ndarray,
    task: Task,
    config: TrainingConfig = TrainingConfig(),
    standardizer: Standardizer | None = None,
    feature_names: list[str] | None = None,
    schema_fingerprint: str | None = None,
) -> LinearModel:
    """Fit a linear model.

    Regression solves the ridge normal equations in closed form (bias
    unpenalized); with l2_penalty == 0 a rank-deficient design raises
    SingularSystem rather than silently regularizing. Binary minimizes the
    logistic loss by full-batch gradient descent, deterministically.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyDataset("training needs a non-empty (n, d) matrix")
    if y.shape != (x.shape[0],):
        raise DimensionMismatch(f"targets {y.shape} do not match {x.shape[0]} rows")
    if standardizer is not None:
        x = standardizer.transform(x)
    n, d = x.shape
    xa = np.hstack([x, np.ones((n, 1))])

    if task is Task.REGRESSION:
        if config.l2_penalty == 0.0 and np.linalg.matrix_rank(xa) < d + 1:
            raise SingularSystem(
                "design matrix is rank-deficient and l2_penalty is 0"
            )
        reg = config.l2_penalty * np.diag(np.r_[np.ones(d), 0.0])
        theta = np.linalg.solve(xa.T @ xa + reg, xa.T @ y)
        if not np.all(np.isfinite(theta)):
            raise NonFiniteLoss("non-finite solution of the normal equations")
        weights, bias = theta[:d], float(theta[d])
    else:
        weights = np.zeros(d)
        bias = 0.0
        lr = config.learning_rate
        for epoch in range(config.epochs):
            z = x @ weights + bias
            p = _sigmoid(z)
            loss = float(np.mean(_softplus(z) - y * z)) + config.l2_penalty * float(
                weights @ weights
            )
            if not np.isfinite(loss):
                raise NonFiniteLoss(f"logistic loss diverged at epoch {epoch}", epoch)
            grad_w = x.T @ (p - y) / n + 2.0 * config.l2_penalty * weights
            grad_b = float(np.mean(p - y))
            weights = weights - lr * grad_w
            bias -= lr * grad_b

    return LinearModel(
        task=task,
        weights=weights,
        bias=bias,
        standardizer=standardizer,
        feature_names=list(feature_names) if feature_names else None,
        schema_fingerprint=schema_fingerprint,
    )


# --------------------------------------------------------------------------
# additive model internals
# --------------------------------------------------------------------------

@dataclass
class _NamParams:
    """Stacked per-feature MLP parameters.

    Layer k holds weights (d, in_k, out_k) and biases (d, out_k) for all d
    feature subnets at once, plus the scalar global bias. Activations are
    kept feature-major (d, n, width) so every layer is one batched matmul.
    """

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    beta: float

    @classmethod
    def init(cls, d: int, hidden_sizes: tuple[int, ...], rng: np.random.Generator) -> "_NamParams":
        sizes = [1, *hidden_sizes, 1]
        weights, biases = [], []
        for layer, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            if layer == len(sizes) - 2:
                # zero output layer: training starts from f_i = 0, avoiding a
                # violent first-step transient that can kill softplus units
                weights.append(np.zeros((d, fan_in, fan_out)))
                biases.append(np.zeros((d, fan_out)))
            elif layer == 0:
                # unit k gets its softplus hinge at a random knot in the
                # (standardized) input range so the units tile the data
                w = rng.normal(0.0, 1.0, size=(d, 1, fan_out))
                knots = rng.uniform(-2.0, 2.0, size=(d, fan_out))
                weights.append(w)
                biases.append(-w[:, 0, :] * knots)
            else:
                scale = np.sqrt(2.0 / fan_in)
                weights.append(rng.normal(0.0, scale, size=(d, fan_in, fan_out)))
                biases.append(np.zeros((d, fan_out)))
        return cls(weights, biases, 0.0)

    @property
    def n_features(self) -> int:
        return self.weights[0].shape[0]


def _nam_forward(params: _NamParams, x: np.ndarray, need_cache: bool = False):
    """Evaluate all subnets: x (n, d) -> per-feature outputs f (d, n).

    With need_cache=True also returns per-layer inputs and the softplus
    derivatives (sigmoids), which are recovered from the forward exponents
    so the backward pass needs no extra transcendental evaluations.
    """
    a = np.ascontiguousarray(x.T)[:, :, None]  # (d, n, 1)
    inputs, sigs = [a], []
    n_layers = len(params.weights)
    for k in range(n_layers - 1):
        z = a @ params.weights[k] + params.biases[k][:, None, :]
        e = np.exp(-np.abs(z))
        a = np.maximum(z, 0.0) + np.log1p(e)  # softplus, stable both tails
        if need_cache:
            sigs.append(np.where(z >= 0.0, 1.0 / (1.0 + e), e / (1.0 + e)))
            inputs.append(a)
    out = a @ params.weights[-1] + params.biases[-1][:, None, :]
    f = out[:, :, 0]  # (d, n)
    if need_cache:
        return f, (inputs, sigs)
    return f


def _nam_loss_and_grads(
    params: _NamParams, x: np.ndarray, y: np.ndarray, task: Task, config: TrainingConfig
):
    """Total loss and gradients for one batch.

    Loss = data term (MSE or logistic) + l2_penalty * sum ||W||^2
         + output_penalty * mean_n sum_i f_i(x_i)^2.
    """
    n = x.shape[0]
    f, (inputs, sigs) = _nam_forward(params, x, need_cache=True)
    z = f.sum(axis=0) + params.beta

    if task is Task.REGRESSION:
        resid = z - y
        data_loss = float(np.mean(resid**2))
        dz = 2.0 * resid / n
    else:
        data_loss = float(np.mean(_softplus(z) - y * z))
        dz = (_sigmoid(z) - y) / n

    l2 = config.l2_penalty
    weight_sq = sum(float(np.sum(w**2)) for w in params.weights)
    out_pen = config.output_penalty * float(np.mean(np.sum(f**2, axis=0)))
    loss = data_loss + l2 * weight_sq + out_pen

    # d(loss)/d(f_i): the additive sum routes dz to every subnet; the output
    # penalty adds its own per-feature term.
    dout = dz[None, :] + (2.0 * config.output_penalty / n) * f  # (d, n)
    delta = dout[:, :, None]  # (d, n, 1)

    grad_w = [None] * len(params.weights)
    grad_b = [None] * len(params.biases)
    for k in range(len(params.weights) - 1, -1, -1):
        grad_w[k] = inputs[k].transpose(0, 2, 1) @ delta + 2.0 * l2 * params.weights[k]
        grad_b[k] = delta.sum(axis=1)
        if k > 0:
            delta = (delta @ params.weights[k].transpose(0, 2, 1)) * sigs[k - 1]
    grad_beta = float(dz.sum())
    return loss, grad_w, grad_b, grad_beta


@dataclass
class AdditiveModel:
    """Per-feature shape networks plus a global bias (sum-of-curves model).

    ``params`` holds raw subnet weights; ``centers[i]`` is the training-set
    mean of subnet i's raw output, and ``bias`` already includes the sum of
    centers, so ``contributions(x).sum() + bias`` is the pre-link prediction
    and every shape function is mean-zero over the training data.
    """

    task: Task
    params: _NamParams
    centers: np.ndarray
    bias: float
    activation: str = "softplus"
    standardizer: Standardizer | None = None
    feature_names: list[str] | None = None
    schema_fingerprint: str | None = None
    loss_history: list[float] = field(default_factory=list, repr=False, compare=False)

    @property
    def n_features(self) -> int:
        return self.params.n_features

    def _standardized(self, x: np.ndarray, what: str) -> tuple[np.ndarray, bool]:
        x, single = _as_matrix(x, self.n_features, what)
        if self.standardizer is not None:
            x = self.standardizer.transform(x)
        return x, single

    def contributions(self, x: np.ndarray):
        """Centered per-feature effects f_i(x_i); one row per input vector."""
        x, single = self._standardized(x, "contributions")
        f = _nam_forward(self.params, x).T - self.centers[None, :]
        return f[0] if single else f

    def decision_function(self, x: np.ndarray):
        """Pre-link prediction: sum of contributions + bias."""
        contrib = self.contributions(x)
        if contrib.ndim == 1:
            return float(contrib.sum() + self.bias)
        return contrib.sum(axis=1) + self.bias

    def predict(self, x: np.ndarray):
        """Regression value, or straight-class probability for binary."""
        z = self.decision_function(x)
        if self.task is Task.BINARY:
            if np.isscalar(z):
                return float(_sigmoid(np.array([z]))[0])
            return _sigmoid(z)
        return z

    def shape_function(self, feature_index: int, grid) -> tuple[np.ndarray, np.ndarray]:
        """Evaluate shape function i over a grid of RAW feature values.

        Returns (grid, f_i(grid)); the grid is passed through the stored
        standardization transform, so the x-axis stays in degrees/ratios.
        """
        if not 0 <= feature_index < self.n_features:
            raise IndexOutOfRange(
                f"feature index {feature_index} outside [0, {self.n_features})"
            )
        grid = np.asarray(grid, dtype=np.float64)
        if self.standardizer is not None:
            std = self.standardizer
            divisor = 1.0 if std.constant_mask[feature_index] else std.stds[feature_index]
            col = (grid - std.means[feature_index]) / divisor
        else:
            col = grid
        # evaluate only subnet i by slicing the stacked parameters
        i = feature_index
        a = col[None, :, None]  # (1, n, 1)
        for k in range(len(self.params.weights) - 1):
            z = a @ self.params.weights[k][i : i + 1] + self.params.biases[k][i : i + 1][:, None, :]
            a = _softplus(z)
        out = a @ self.params.weights[-1][i : i + 1] + self.params.biases[-1][i : i + 1][:, None, :]
        ys = out[0, :, 0] - self.centers[i]
        return grid, ys


def train_nam(
    x: np.ndarray,
    y: np.ndarray,
    task: Task,
    config: TrainingConfig = TrainingConfig(),
    standardizer: Standardizer | None = None,
    feature_names: list[str] | None = None,
    schema_fingerprint: str | None = None,
) -> AdditiveModel:
    """Train an additive model by seeded mini-batch gradient descent.

    Uses a PCG64 generator seeded from config.seed for initialization and
    batch shuffling. Records the full-training-set loss once per epoch in
    ``model.loss_history`` and raises NonFiniteLoss (with the epoch) on
    divergence. Shape functions are re-centered after training.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyDataset("training needs a non-empty (n, d) matrix")
    if y.shape != (x.shape[0],):
        raise DimensionMismatch(f"targets {y.shape} do not match {x.shape[0]} rows")
    if standardizer is not None:
        x = standardizer.transform(x)
    n, d = x.shape

    rng = np.random.default_rng(config.seed)
    params = _NamParams.init(d, tuple(config.hidden_sizes), rng)
    batch = min(config.batch_size, n)
    loss_history: list[float] = []
    # every subnet receives the full residual signal, so the step taken in
    # prediction space scales with the feature count; dividing by d keeps the
    # configured rate feature-count independent
    base_lr = config.learning_rate / d

    for epoch in range(config.epochs):
        # cosine annealing from the base rate down to 1% of it; the
        # shrinking step lets mini-batch descent settle instead of orbiting
        frac = epoch / max(config.epochs - 1, 1)
        lr = base_lr * (0.01 + 0.99 * 0.5 * (1.0 + np.cos(np.pi * frac)))
        order = rng.permutation(n)
        batch_losses = []
        for start in range(0, n, batch):
            idx = order[start : start + batch]
            loss, gw, gb, gbeta = _nam_loss_and_grads(params, x[idx], y[idx], task, config)
            if not np.isfinite(loss):
                raise NonFiniteLoss(f"training loss diverged at epoch {epoch}", epoch)
            batch_losses.append(loss)
            for k in range(len(params.weights)):
                params.weights[k] -= lr * gw[k]
                params.biases[k] -= lr * gb[k]
            params.beta -= lr * gbeta
        # mean of batch losses, each at the parameters current when visited;
        # identical to the exact loss when batch_size >= n
        loss_history.append(float(np.mean(batch_losses)))

    f_train = _nam_forward(params, x)
    centers = f_train.mean(axis=1)
    bias = params.beta + float(centers.sum())

    return AdditiveModel(
        task=task,
        params=params,
        centers=centers,
        bias=bias,
        standardizer=standardizer,
        feature_names=list(feature_names) if feature_names else None,
        schema_fingerprint=schema_fingerprint,
        loss_history=loss_history,
    )


# --------------------------------------------------------------------------
# persistence
# --------------------------------------------------------------------------

def save_model(model: LinearModel | AdditiveModel, path: str) -> None:
    """Write a versioned, self-describing JSON model file."""
    envelope: dict = {
        "version": MODEL_FILE_VERSION,
        "task": model.task.value,
        "schema_fingerprint": model.schema_fingerprint,
        "feature_names": model.feature_names,
        "standardization": (
            model.standardizer.to_dict() if model.standardizer is not None else None
        ),
    }
    if isinstance(model, LinearModel):
        envelope["model_kind"] = "linear"
        envelope["parameters"] = {
            "weights": model.weights.tolist(),
            "bias": model.bias,
        }
    elif isinstance(model, AdditiveModel):
        envelope["model_kind"] = "nam"
        envelope["parameters"] = {
            "bias": model.bias,
            "beta_raw": model.params.beta,
            "centers": model.centers.tolist(),
            "activation": model.activation,
            "layer_weights": [w.tolist() for w in model.params.weights],
            "layer_biases": [b.tolist() for b in model.params.biases],
        }
    else:
        raise TypeError(f"cannot save model of type {type(model).__name__}")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(envelope, fh)


def load_model(path: str) -> LinearModel | AdditiveModel:
    """Load a model file; round-trips predictions bit-identically."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            envelope = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CorruptFile(f"{path}: not a valid model file: {exc}") from exc
    if not isinstance(envelope, dict):
        raise CorruptFile(f"{path}: expected a JSON object")
    version = envelope.get("version")
    if version != MODEL_FILE_VERSION:
        raise VersionMismatch(
            f"{path}: file version {version!r}, supported {MODEL_FILE_VERSION}"
        )
    try:
        task = Task(envelope["task"])
        kind = envelope["model_kind"]
        std_raw = envelope.get("standardization")
        standardizer = Standardizer.from_dict(std_raw) if std_raw else None
        names = envelope.get("feature_names")
        fingerprint = envelope.get("schema_fingerprint")
        p = envelope["parameters"]
        if kind == "linear":
            return LinearModel(
                task=task,
                weights=np.asarray(p["weights"], dtype=np.float64),
                bias=float(p["bias"]),
                standardizer=standardizer,
                feature_names=names,
                schema_fingerprint=fingerprint,
            )
        if kind == "nam":
            params = _NamParams(
                weights=[np.asarray(w, dtype=np.float64) for w in p["layer_weights"]],
                biases=[np.asarray(b, dtype=np.float64) for b in p["layer_biases"]],
                beta=float(p["beta_raw"]),
            )
            return AdditiveModel(
                task=task,
                params=params,
                centers=np.asarray(p["centers"], dtype=np.float64),
                bias=float(p["bias"]),
                activation=str(p.get("activation", "softplus")),
                standardizer=standardizer,
                feature_names=names,
                schema_fingerprint=fingerprint,
            )
        raise CorruptFile(f"{path}: unknown model_kind {kind!r}")
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptFile(f"{path}: malformed model file: {exc}") from exc

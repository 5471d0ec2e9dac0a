"""Feedforward network [p, 5, 3, 1] with logistic units throughout,
trained by resilient backpropagation (default) or batch gradient descent
on the summed squared error E = sum((output - target)^2), targets 1 for
the positive class and 0 otherwise.

Inputs are min-max normalized to [0,1] with parameters fitted on the
training matrix only; at prediction time unseen values are clamped into
the unit interval so logistic units never see raw month-scale magnitudes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .features import FeatureMatrix, FeatureSchema
from .records import ValidationError

HIDDEN_SIZES = (5, 3)

RPROP = "rprop"
GRADIENT_DESCENT = "gd"

# Riedmiller's resilient-propagation constants.
STEP_INITIAL = 0.1
STEP_MIN = 1e-6
STEP_MAX = 50.0
STEP_UP = 1.2
STEP_DOWN = 0.5


@dataclass(frozen=True)
class Normalization:
    """Per-column min-max scaling. Constant columns scale by 1 so they map
    to 0 instead of dividing by zero."""

    mins: tuple[float, ...]
    maxs: tuple[float, ...]

    def spans(self) -> np.ndarray:
        mins = np.asarray(self.mins)
        maxs = np.asarray(self.maxs)
        span = maxs - mins
        span[span == 0.0] = 1.0
        return span

    def apply(self, rows: np.ndarray, clamp: bool = True) -> np.ndarray:
        scaled = (np.asarray(rows, dtype=float) - np.asarray(self.mins)) / self.spans()
        if clamp:
            scaled = np.clip(scaled, 0.0, 1.0)
        return scaled


def fit_normalization(rows: np.ndarray) -> Normalization:
    rows = np.asarray(rows, dtype=float)
    if rows.size == 0:
        raise ValidationError("cannot fit normalization on an empty matrix")
    return Normalization(
        mins=tuple(float(v) for v in rows.min(axis=0)),
        maxs=tuple(float(v) for v in rows.max(axis=0)),
    )


@dataclass(frozen=True)
class TrainParams:
    algorithm: str = RPROP
    stop_threshold: float = 0.01  # on the largest absolute gradient component
    max_epochs: int = 100000
    seed: int = 0
    learning_rate: float = 0.01  # batch gradient descent only
    restarts: int = 1
    hidden: tuple[int, ...] = HIDDEN_SIZES

    def __post_init__(self):
        if self.algorithm not in (RPROP, GRADIENT_DESCENT):
            raise ValidationError(f"unknown algorithm {self.algorithm!r}")
        if self.stop_threshold <= 0:
            raise ValidationError("stop_threshold must be positive")
        if self.max_epochs < 1:
            raise ValidationError("max_epochs must be at least 1")
        if self.restarts < 1:
            raise ValidationError("restarts must be at least 1")
        if any(h < 1 for h in self.hidden):
            raise ValidationError("hidden layer sizes must be positive")


@dataclass
class MlpModel:
    weights: tuple[np.ndarray, ...]  # layer l: shape (n_in, n_out)
    biases: tuple[np.ndarray, ...]  # layer l: shape (n_out,)
    normalization: Normalization
    schema: FeatureSchema
    positive_class: str
    negative_class: str
    converged: bool
    final_error: float
    epochs_run: int

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.weights[0].shape[0],) + tuple(w.shape[1] for w in self.weights)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _forward_all(weights, biases, x: np.ndarray) -> list[np.ndarray]:
    """Activations per layer, input included; x is (n, p)."""
    activations = [x]
    for w, b in zip(weights, biases):
        activations.append(_sigmoid(activations[-1] @ w + b))
    return activations


def forward(model: MlpModel, row) -> float:
    """Positive-class score in (0,1) for one raw (unnormalized) row."""
    row = np.asarray(row, dtype=float)
    if row.shape != (model.schema.n_columns,):
        raise ValidationError(
            f"row has shape {row.shape}, schema expects ({model.schema.n_columns},)"
        )
    x = model.normalization.apply(row.reshape(1, -1))
    return float(_forward_all(model.weights, model.biases, x)[-1][0, 0])


def _backprop(weights, biases, x: np.ndarray, targets: np.ndarray):
    """Summed squared error and its exact gradient over the batch."""
    activations = _forward_all(weights, biases, x)
    output = activations[-1]
    diff = output - targets.reshape(-1, 1)
    error = float(np.sum(diff * diff))
    delta = 2.0 * diff * output * (1.0 - output)
    weight_grads = [None] * len(weights)
    bias_grads = [None] * len(weights)
    for layer in range(len(weights) - 1, -1, -1):
        weight_grads[layer] = activations[layer].T @ delta
        bias_grads[layer] = delta.sum(axis=0)
        if layer > 0:
            a = activations[layer]
            delta = (delta @ weights[layer].T) * a * (1.0 - a)
    return error, weight_grads, bias_grads


def gradient(model: MlpModel, rows, targets):
    """Gradient of the summed squared error over a raw-row batch; returns
    (weight_grads, bias_grads) shaped like the model's parameters."""
    rows = np.asarray(rows, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if rows.ndim != 2 or rows.shape[0] == 0:
        raise ValidationError("gradient needs a non-empty 2-d batch")
    if targets.shape[0] != rows.shape[0]:
        raise ValidationError("batch rows and targets differ in length")
    x = model.normalization.apply(rows)
    _, wg, bg = _backprop(model.weights, model.biases, x, targets)
    return tuple(wg), tuple(bg)


def init_parameters(layer_sizes, rng: np.random.Generator):
    weights, biases = [], []
    for n_in, n_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        weights.append(rng.uniform(-0.5, 0.5, size=(n_in, n_out)))
        biases.append(rng.uniform(-0.5, 0.5, size=n_out))
    return weights, biases


def _flatten(arrays) -> np.ndarray:
    return np.concatenate([a.ravel() for a in arrays])


def _train_once(x, targets, layer_sizes, params: TrainParams, rng):
    weights, biases = init_parameters(layer_sizes, rng)
    n_params = len(weights)
    if params.algorithm == RPROP:
        w_steps = [np.full_like(w, STEP_INITIAL) for w in weights]
        b_steps = [np.full_like(b, STEP_INITIAL) for b in biases]
        w_prev = [np.zeros_like(w) for w in weights]
        b_prev = [np.zeros_like(b) for b in biases]
    error = float("inf")
    converged = False
    epoch = 0
    for epoch in range(1, params.max_epochs + 1):
        error, wg, bg = _backprop(weights, biases, x, targets)
        if not np.isfinite(error):
            raise ArithmeticError(f"training error diverged at epoch {epoch}")
        gmax = max(float(np.abs(g).max()) for g in wg + bg)
        if gmax < params.stop_threshold:
            converged = True
            break
        if params.algorithm == GRADIENT_DESCENT:
            for i in range(n_params):
                weights[i] -= params.learning_rate * wg[i]
                biases[i] -= params.learning_rate * bg[i]
            continue
        # iRprop-: adapt per-parameter steps from gradient sign agreement,
        # dropping the gradient (no update) where the sign flipped.
        for i in range(n_params):
            for grads, prevs, steps, values in (
                (wg[i], w_prev[i], w_steps[i], weights[i]),
                (bg[i], b_prev[i], b_steps[i], biases[i]),
            ):
                agree = prevs * grads
                np.multiply(steps, STEP_UP, out=steps, where=agree > 0)
                np.multiply(steps, STEP_DOWN, out=steps, where=agree < 0)
                np.clip(steps, STEP_MIN, STEP_MAX, out=steps)
                grads[agree < 0] = 0.0
                values -= np.sign(grads) * steps
                prevs[...] = grads
    return weights, biases, error, converged, epoch


def fit_mlp(train: FeatureMatrix, params: TrainParams = TrainParams()) -> MlpModel:
    """Train on the matrix; with restarts > 1, run that many independently
    seeded fits and keep the one with the lowest final error.

    A non-converged run is not an error: the model comes back with
    converged=False and the caller decides."""
    if train.n == 0:
        raise ValidationError("cannot fit on an empty training set")
    normalization = fit_normalization(train.rows)
    x = normalization.apply(train.rows)
    targets = train.y().astype(float)
    layer_sizes = (train.p,) + tuple(params.hidden) + (1,)
    seeds = np.random.SeedSequence(params.seed).spawn(params.restarts)
    best = None
    for seed in seeds:
        rng = np.random.Generator(np.random.PCG64(seed))
        fit = _train_once(x, targets, layer_sizes, params, rng)
        if best is None or fit[2] < best[2]:
            best = fit
    weights, biases, error, converged, epochs = best
    negative = next((lab for lab in train.labels if lab != train.positive_class),
                    "No" if train.positive_class == "Yes" else "Yes")
    return MlpModel(
        weights=tuple(weights),
        biases=tuple(biases),
        normalization=normalization,
        schema=train.schema,
        positive_class=train.positive_class,
        negative_class=negative,
        converged=converged,
        final_error=error,
        epochs_run=epochs,
    )


def predict_mlp(model: MlpModel, row) -> tuple[str, float]:
    """Score a raw row; the positive class wins at score >= 0.5 (a missed
    case costs more than a false alarm, so the tie goes positive)."""
    score = forward(model, row)
    label = model.positive_class if score >= 0.5 else model.negative_class
    return label, score


def predict_mlp_many(model: MlpModel, rows) -> list[tuple[str, float]]:
    return [predict_mlp(model, r) for r in np.asarray(rows, dtype=float)]

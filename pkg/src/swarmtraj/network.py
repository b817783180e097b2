"""Single-hidden-layer feedforward regression network.

One network maps the 9 boundary-state features of a trajectory (start,
midpoint, and destination positions) to the 201 waypoint coordinates of a
single axis.  The hidden layer applies a configurable activation; the
output layer is strictly affine.  The full parameter Jacobian needed by
Levenberg-Marquardt training is available in closed form.

Parameter flattening order everywhere: w1 row-major, b1, w2 row-major, b2.
"""

from __future__ import annotations

from dataclasses import dataclass
import json

import numpy as np

from .activations import ActivationSpec, batch_derivative, batch_evaluate, spec_from_json, spec_to_json

MODEL_FORMAT_VERSION = "1"


@dataclass(frozen=True)
class NetworkShape:
    n_inputs: int = 9
    n_hidden: int = 15
    n_outputs: int = 201

    def __post_init__(self):
        if min(self.n_inputs, self.n_hidden, self.n_outputs) < 1:
            raise ValueError("all layer sizes must be >= 1")

    @property
    def param_count(self) -> int:
        return (self.n_hidden * self.n_inputs + self.n_hidden
                + self.n_outputs * self.n_hidden + self.n_outputs)


@dataclass(frozen=True)
class NetworkParams:
    w1: np.ndarray  # (n_hidden, n_inputs)
    b1: np.ndarray  # (n_hidden,)
    w2: np.ndarray  # (n_outputs, n_hidden)
    b2: np.ndarray  # (n_outputs,)
    activation: ActivationSpec
    shape: NetworkShape

    def __post_init__(self):
        h, i, o = self.shape.n_hidden, self.shape.n_inputs, self.shape.n_outputs
        if self.w1.shape != (h, i) or self.b1.shape != (h,):
            raise ValueError("hidden layer parameter shapes inconsistent with network shape")
        if self.w2.shape != (o, h) or self.b2.shape != (o,):
            raise ValueError("output layer parameter shapes inconsistent with network shape")
        for arr in (self.w1, self.b1, self.w2, self.b2):
            if not np.isfinite(arr).all():
                raise ValueError("network parameters must be finite")


def init_params(shape: NetworkShape, activation: ActivationSpec, seed: int) -> NetworkParams:
    """Seeded uniform init: weights in +/- 1/sqrt(fan_in), biases zero."""
    rng = np.random.default_rng(seed)
    lim1 = 1.0 / np.sqrt(shape.n_inputs)
    lim2 = 1.0 / np.sqrt(shape.n_hidden)
    return NetworkParams(
        w1=rng.uniform(-lim1, lim1, size=(shape.n_hidden, shape.n_inputs)),
        b1=np.zeros(shape.n_hidden),
        w2=rng.uniform(-lim2, lim2, size=(shape.n_outputs, shape.n_hidden)),
        b2=np.zeros(shape.n_outputs),
        activation=activation,
        shape=shape,
    )


def _check_input(params: NetworkParams, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (params.shape.n_inputs,):
        raise ValueError(f"input length {x.shape} does not match n_inputs={params.shape.n_inputs}")
    if not np.isfinite(x).all():
        raise ValueError("network input must be finite")
    return x


def forward(params: NetworkParams, x) -> np.ndarray:
    """Network output for one input vector."""
    x = _check_input(params, x)
    z = params.w1 @ x + params.b1
    a = batch_evaluate(params.activation, z)
    return params.w2 @ a + params.b2


def forward_batch(params: NetworkParams, X) -> np.ndarray:
    """Network outputs for a batch of input rows, shape (n, n_outputs)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != params.shape.n_inputs:
        raise ValueError(f"batch shape {X.shape} does not match n_inputs={params.shape.n_inputs}")
    Z = X @ params.w1.T + params.b1
    A = batch_evaluate(params.activation, Z.ravel()).reshape(Z.shape)
    return A @ params.w2.T + params.b2


def jacobian(params: NetworkParams, x) -> np.ndarray:
    """d(output_i)/d(param_j) for one input, shape (n_outputs, param_count)."""
    x = _check_input(params, x)
    o = params.shape.n_outputs
    z = params.w1 @ x + params.b1
    a = batch_evaluate(params.activation, z)
    fp = batch_derivative(params.activation, z)
    G = params.w2 * fp[None, :]  # d out / d z, per hidden unit
    j_w1 = (G[:, :, None] * x[None, None, :]).reshape(o, -1)
    j_w2 = np.kron(np.eye(o), a)
    return np.concatenate([j_w1, G, j_w2, np.eye(o)], axis=1)


def flatten_params(params: NetworkParams) -> np.ndarray:
    return np.concatenate([params.w1.ravel(), params.b1, params.w2.ravel(), params.b2])


def unflatten_params(shape: NetworkShape, activation: ActivationSpec, flat) -> NetworkParams:
    flat = np.asarray(flat, dtype=np.float64)
    if flat.shape != (shape.param_count,):
        raise ValueError(f"expected {shape.param_count} parameters, got {flat.shape}")
    h, i, o = shape.n_hidden, shape.n_inputs, shape.n_outputs
    pos = 0
    w1 = flat[pos:pos + h * i].reshape(h, i).copy(); pos += h * i
    b1 = flat[pos:pos + h].copy(); pos += h
    w2 = flat[pos:pos + o * h].reshape(o, h).copy(); pos += o * h
    b2 = flat[pos:pos + o].copy()
    return NetworkParams(w1=w1, b1=b1, w2=w2, b2=b2, activation=activation, shape=shape)


@dataclass(frozen=True)
class MinMaxNorm:
    """Per-dimension affine map of [lo, hi] onto [0, 1].

    Degenerate dimensions (hi == lo) map to 0 so constant features and
    targets survive normalization.
    """

    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def fit(cls, data) -> "MinMaxNorm":
        data = np.asarray(data, dtype=np.float64)
        return cls(lo=data.min(axis=0), hi=data.max(axis=0))

    @property
    def span(self) -> np.ndarray:
        return np.where(self.hi > self.lo, self.hi - self.lo, 1.0)

    def apply(self, v) -> np.ndarray:
        return (np.asarray(v, dtype=np.float64) - self.lo) / self.span

    def invert(self, v) -> np.ndarray:
        return np.asarray(v, dtype=np.float64) * self.span + self.lo


@dataclass(frozen=True)
class TrainedModel:
    """A trained per-axis network plus the normalization fitted on its training split."""

    params: NetworkParams
    input_norm: MinMaxNorm
    target_norm: MinMaxNorm
    axis: str  # "x" | "y" | "z"
    seed: int
    split: tuple[float, float, float] = (0.70, 0.15, 0.15)

    def predict(self, features) -> np.ndarray:
        """Raw-coordinate waypoint predictions for raw-coordinate features."""
        xn = self.input_norm.apply(features)
        return self.target_norm.invert(forward(self.params, xn))

    def predict_normalized(self, features) -> np.ndarray:
        return forward(self.params, self.input_norm.apply(features))


def model_to_dict(model: TrainedModel) -> dict:
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "axis": model.axis,
        "seed": model.seed,
        "split": list(model.split),
        "shape": {
            "n_inputs": model.params.shape.n_inputs,
            "n_hidden": model.params.shape.n_hidden,
            "n_outputs": model.params.shape.n_outputs,
        },
        "activation": spec_to_json(model.params.activation),
        "input_norm": {"lo": model.input_norm.lo.tolist(), "hi": model.input_norm.hi.tolist()},
        "target_norm": {"lo": model.target_norm.lo.tolist(), "hi": model.target_norm.hi.tolist()},
        "params": flatten_params(model.params).tolist(),
    }


def model_from_dict(obj: dict) -> TrainedModel:
    if "format_version" not in obj:
        raise ValueError("model file is missing format_version")
    shape = NetworkShape(
        n_inputs=int(obj["shape"]["n_inputs"]),
        n_hidden=int(obj["shape"]["n_hidden"]),
        n_outputs=int(obj["shape"]["n_outputs"]),
    )
    activation = spec_from_json(obj["activation"])
    params = unflatten_params(shape, activation, np.asarray(obj["params"], dtype=np.float64))
    return TrainedModel(
        params=params,
        input_norm=MinMaxNorm(
            lo=np.asarray(obj["input_norm"]["lo"], dtype=np.float64),
            hi=np.asarray(obj["input_norm"]["hi"], dtype=np.float64),
        ),
        target_norm=MinMaxNorm(
            lo=np.asarray(obj["target_norm"]["lo"], dtype=np.float64),
            hi=np.asarray(obj["target_norm"]["hi"], dtype=np.float64),
        ),
        axis=str(obj["axis"]),
        seed=int(obj["seed"]),
        split=tuple(float(v) for v in obj.get("split", (0.70, 0.15, 0.15))),
    )


def save_model(model: TrainedModel, path) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path) -> TrainedModel:
    with open(path) as fh:
        return model_from_dict(json.load(fh))

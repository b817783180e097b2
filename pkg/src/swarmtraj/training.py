"""Levenberg-Marquardt training of per-axis trajectory networks.

One epoch is one full-batch LM step: solve
(J'J + lambda * diag(J'J)) * delta = J'r and accept the step only if it
lowers the batch SSE, shrinking lambda on accept and growing it on reject.

The solve exploits the network structure instead of forming the full
3366x3366 system: the rows of (w2, b2) couple to each other only within
one output neuron and through matrices shared by all output neurons, so a
Schur complement over the hidden-layer parameters reduces the work to one
dense solve of size n_hidden*(n_inputs+1).  The result is identical (up to
roundoff) to the dense normal-equations solve, which the test suite checks
against directly.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .activations import ActivationSpec, batch_derivative, batch_evaluate, calibrated_spec
from .metrics import MetricResult, aggregate, compute_all
from .network import (
    MinMaxNorm,
    NetworkParams,
    NetworkShape,
    TrainedModel,
    forward_batch,
    init_params,
)
from .swarm import N_WAYPOINTS, SwarmDataset, Trajectory

AXES = ("x", "y", "z")
_AXIS_COL = {"x": 0, "y": 1, "z": 2}

# lambda never decays below this, so the damped system stays definite.
LAMBDA_MIN = 1e-12
# diag(J'J) entries are floored at this relative level before damping, so
# dead hidden units (e.g. saturated ReLU) cannot make the system singular.
DIAG_FLOOR_REL = 1e-12

STOP_MAX_EPOCHS = "max_epochs"
STOP_VAL_PATIENCE = "val_patience"
STOP_LAMBDA_OVERFLOW = "lambda_overflow"


class NumericError(RuntimeError):
    """Raised when training encounters a numerically unusable state."""


@dataclass(frozen=True)
class TrainConfig:
    seed: int
    max_epochs: int = 1000
    lambda_init: float = 1e-3
    lambda_up: float = 10.0
    lambda_down: float = 0.1
    lambda_max: float = 1e10
    val_patience: int = 6  # 0 disables early stopping
    split: tuple[float, float, float] = (0.70, 0.15, 0.15)
    calibrate_activation: bool = False

    def __post_init__(self):
        if self.max_epochs < 0:
            raise ValueError("max_epochs must be >= 0")
        if not (self.lambda_up > 1.0 > self.lambda_down > 0.0):
            raise ValueError("need lambda_up > 1 > lambda_down > 0")
        if self.lambda_init <= 0 or self.lambda_max <= 0:
            raise ValueError("lambda_init and lambda_max must be > 0")
        object.__setattr__(self, "split", tuple(float(f) for f in self.split))
        if len(self.split) != 3 or any(f < 0 for f in self.split):
            raise ValueError("split must be three non-negative fractions")
        if abs(sum(self.split) - 1.0) > 1e-9:
            raise ValueError("split fractions must sum to 1")

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "max_epochs": self.max_epochs,
            "lambda_init": self.lambda_init,
            "lambda_up": self.lambda_up,
            "lambda_down": self.lambda_down,
            "lambda_max": self.lambda_max,
            "val_patience": self.val_patience,
            "split": list(self.split),
            "calibrate_activation": self.calibrate_activation,
        }


@dataclass
class TrainReport:
    activation: str
    axis: str
    seed: int
    epochs_run: int
    train_mse_history: list[float]
    val_mse_history: list[float]
    test_mse: float
    test_smape: float
    stopped_reason: str

    def to_dict(self) -> dict:
        return {
            "activation": self.activation,
            "axis": self.axis,
            "seed": self.seed,
            "epochs_run": self.epochs_run,
            "train_mse_history": self.train_mse_history,
            "val_mse_history": self.val_mse_history,
            "test_mse": self.test_mse,
            "test_smape": self.test_smape,
            "stopped_reason": self.stopped_reason,
        }


def trajectory_features(traj: Trajectory) -> np.ndarray:
    """Start, midpoint, and destination positions as a 9-vector."""
    mid = (traj.n_waypoints - 1) // 2
    return np.concatenate([traj.xyz[0], traj.xyz[mid], traj.xyz[-1]])


def build_regression_arrays(dataset: SwarmDataset, axis: str):
    """(features, per-axis waypoint targets) for every trajectory."""
    col = _AXIS_COL[axis.lower()]
    X = np.stack([trajectory_features(t) for t in dataset.trajectories])
    Y = np.stack([t.xyz[:, col] for t in dataset.trajectories])
    return X, Y


def split_dataset(dataset: SwarmDataset, config: TrainConfig):
    """Deterministic shuffled 70/15/15 split into index lists."""
    n = len(dataset.trajectories)
    if n < 3:
        raise ValueError(f"insufficient data: need at least 3 trajectories, got {n}")
    n_train = int(math.floor(config.split[0] * n))
    n_val = int(math.floor(config.split[1] * n))
    perm = np.random.default_rng(config.seed).permutation(n)
    return (
        [int(i) for i in perm[:n_train]],
        [int(i) for i in perm[n_train:n_train + n_val]],
        [int(i) for i in perm[n_train + n_val:]],
    )


def _sse(params: NetworkParams, X, Y) -> float:
    r = Y - forward_batch(params, X)
    return float((r * r).sum())


def _normal_equation_pieces(params: NetworkParams, X, Y):
    """Shared factors of J'J and J'r for the structured solve."""
    act = params.activation
    n = X.shape[0]
    Xe = np.hstack([X, np.ones((n, 1))])
    Z = X @ params.w1.T + params.b1
    A = batch_evaluate(act, Z.ravel()).reshape(Z.shape)
    Fp = batch_derivative(act, Z.ravel()).reshape(Z.shape)
    Ae = np.hstack([A, np.ones((n, 1))])
    R = Y - (A @ params.w2.T + params.b2)
    return Xe, A, Fp, Ae, R


def _lm_delta(params: NetworkParams, X, Y, lam: float):
    """Solve the damped normal equations for the LM update.

    Returns (dw1, db1, dw2, db2, gradient_is_zero).  Raises NumericError
    if the damped system cannot be factorized.
    """
    shape = params.shape
    h, i, o = shape.n_hidden, shape.n_inputs, shape.n_outputs
    e = i + 1
    hd = h + 1

    Xe, A, Fp, Ae, R = _normal_equation_pieces(params, X, Y)

    W2TW2 = params.w2.T @ params.w2
    T1 = Fp[:, :, None] * Xe[:, None, :]  # (n, h, e)
    M1 = T1.reshape(-1, h * e)
    Huu = (M1.T @ M1).reshape(h, e, h, e) * W2TW2[:, None, :, None]
    Huu = Huu.reshape(h * e, h * e)
    M = np.tensordot(T1, Ae, axes=(0, 0))  # (h, e, hd)
    N = Ae.T @ Ae  # (hd, hd), shared by every output neuron

    RW = R @ params.w2  # (n, h)
    g_u = (Fp * RW).T @ Xe  # (h, e)
    G_q = Ae.T @ R  # (hd, o)

    if not np.any(g_u) and not np.any(G_q):
        zero = np.zeros
        return zero((h, i)), zero(h), zero((o, h)), zero(o), True

    # Marquardt damping with a floored diagonal (floor shared with the
    # dense-oracle formulation: relative to the largest diagonal entry).
    d_u = np.diag(Huu).copy()
    d_q = np.diag(N).copy()
    floor = DIAG_FLOOR_REL * max(1.0, float(d_u.max(initial=0.0)), float(d_q.max(initial=0.0)))
    d_u = np.maximum(d_u, floor)
    d_q = np.maximum(d_q, floor)

    try:
        Dmat = N + lam * np.diag(d_q)
        Dinv = np.linalg.inv(Dmat)
        M2 = M.reshape(h * e, hd)
        Q = ((M2 @ Dinv) @ M2.T).reshape(h, e, h, e) * W2TW2[:, None, :, None]
        S = Huu + lam * np.diag(d_u) - Q.reshape(h * e, h * e)

        Hq = Dinv @ G_q  # (hd, o)
        red = np.einsum("jpm,mj->jp", M, Hq @ params.w2)
        rhs = g_u - red

        du = np.linalg.solve(S, rhs.reshape(-1)).reshape(h, e)

        T = np.einsum("jpm,jp->jm", M, du)  # (h, hd)
        Dq = Dinv @ (G_q - (params.w2 @ T).T)  # (hd, o)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"normal-equations solve failed at lambda={lam!r}: {exc}") from exc

    return du[:, :i], du[:, i], Dq[:h, :].T, Dq[h, :], False


def lm_step(params: NetworkParams, X, Y, lam: float, *,
            lambda_up: float = 10.0, lambda_down: float = 0.1):
    """One damped Gauss-Newton step on the batch (X, Y).

    Returns (new_params, new_lambda, accepted).  A step is accepted only
    if it strictly lowers the batch SSE; when the residual gradient is
    exactly zero the (unchanged) parameters count as accepted, since no
    step can improve on them.
    """
    if lam <= 0:
        raise ValueError("lambda must be > 0")
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("batch must be non-empty")

    dw1, db1, dw2, db2, grad_zero = _lm_delta(params, X, Y, lam)
    if grad_zero:
        return params, max(lam * lambda_down, LAMBDA_MIN), True

    w1 = params.w1 + dw1
    b1 = params.b1 + db1
    w2 = params.w2 + dw2
    b2 = params.b2 + db2
    finite = all(np.isfinite(arr).all() for arr in (w1, b1, w2, b2))
    if finite:
        candidate = NetworkParams(w1=w1, b1=b1, w2=w2, b2=b2,
                                  activation=params.activation, shape=params.shape)
        if _sse(candidate, X, Y) < _sse(params, X, Y):
            return candidate, max(lam * lambda_down, LAMBDA_MIN), True
    return params, lam * lambda_up, False


def train(dataset: SwarmDataset, axis: str, activation: ActivationSpec,
          config: TrainConfig):
    """Train one per-axis network; returns (TrainedModel, TrainReport).

    Inputs and targets are min-max normalized to [0, 1] with statistics
    from the training split; all reported errors live in that normalized
    space.  The returned model holds the parameters with the best
    validation MSE seen during training.
    """
    axis = axis.lower()
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}, got {axis!r}")
    for traj in dataset.trajectories:
        if traj.n_waypoints != N_WAYPOINTS:
            raise ValueError(
                f"uav {traj.uav_id}: expected {N_WAYPOINTS} waypoints, got {traj.n_waypoints}"
            )

    train_idx, val_idx, test_idx = split_dataset(dataset, config)
    X, Y = build_regression_arrays(dataset, axis)
    input_norm = MinMaxNorm.fit(X[train_idx])
    target_norm = MinMaxNorm.fit(Y[train_idx])
    Xn = input_norm.apply(X)
    Yn = target_norm.apply(Y)

    shape = NetworkShape(n_inputs=X.shape[1], n_outputs=Y.shape[1])
    params = init_params(shape, activation, config.seed)
    if config.calibrate_activation:
        z = Xn[train_idx] @ params.w1.T + params.b1
        spec = calibrated_spec(activation, z)
        params = NetworkParams(w1=params.w1, b1=params.b1, w2=params.w2, b2=params.b2,
                               activation=spec, shape=shape)

    Xtr, Ytr = Xn[train_idx], Yn[train_idx]
    Xva, Yva = Xn[val_idx], Yn[val_idx]
    n_out = shape.n_outputs

    def mse_on(p, Xs, Ys):
        if Xs.shape[0] == 0:
            return None
        return _sse(p, Xs, Ys) / (Xs.shape[0] * n_out)

    lam = config.lambda_init
    best_params = params
    best_val = math.inf
    bad_epochs = 0
    train_hist: list[float] = []
    val_hist: list[float] = []
    stopped = STOP_MAX_EPOCHS

    for epoch in range(config.max_epochs):
        params, lam, _accepted = lm_step(params, Xtr, Ytr, lam,
                                         lambda_up=config.lambda_up,
                                         lambda_down=config.lambda_down)
        train_mse = mse_on(params, Xtr, Ytr)
        val_mse = mse_on(params, Xva, Yva)
        if val_mse is None:  # tiny datasets: fall back to train MSE
            val_mse = train_mse
        if not (math.isfinite(train_mse) and math.isfinite(val_mse)):
            raise NumericError(f"non-finite loss at epoch {epoch}")
        train_hist.append(train_mse)
        val_hist.append(val_mse)

        if val_mse < best_val:
            best_val = val_mse
            best_params = params
            bad_epochs = 0
        else:
            bad_epochs += 1
        if config.val_patience > 0 and bad_epochs >= config.val_patience:
            stopped = STOP_VAL_PATIENCE
            break
        if lam > config.lambda_max:
            stopped = STOP_LAMBDA_OVERFLOW
            break

    results = [
        compute_all(Yn[i], forward_batch(best_params, Xn[i:i + 1])[0])
        for i in test_idx
    ]
    test = aggregate(results)

    model = TrainedModel(params=best_params, input_norm=input_norm,
                         target_norm=target_norm, axis=axis, seed=config.seed,
                         split=config.split)
    report = TrainReport(
        activation=activation.kind,
        axis=axis,
        seed=config.seed,
        epochs_run=len(train_hist),
        train_mse_history=train_hist,
        val_mse_history=val_hist,
        test_mse=test.mse,
        test_smape=test.smape,
        stopped_reason=stopped,
    )
    return model, report


def evaluate_model(model: TrainedModel, dataset: SwarmDataset, indices=None) -> MetricResult:
    """Normalized-space metrics of a stored model over dataset trajectories."""
    for traj in dataset.trajectories:
        if traj.n_waypoints != model.params.shape.n_outputs:
            raise ValueError(
                f"uav {traj.uav_id}: {traj.n_waypoints} waypoints does not match "
                f"model n_outputs={model.params.shape.n_outputs}"
            )
    X, Y = build_regression_arrays(dataset, model.axis)
    Xn = model.input_norm.apply(X)
    Yn = model.target_norm.apply(Y)
    if indices is None:
        indices = range(len(dataset.trajectories))
    results = [compute_all(Yn[i], forward_batch(model.params, Xn[i:i + 1])[0]) for i in indices]
    return aggregate(results)

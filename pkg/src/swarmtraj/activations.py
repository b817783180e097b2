"""Hidden-layer activation functions and their analytic derivatives.

Eight activations are supported through a registry keyed by kind string:
sigmoid, tanh, relu, leaky_relu, swish, maxout, elliot, and
adapto_swelli_gauss (Swish below a threshold alpha, Elliot times a
scaled-and-shifted Gaussian above it).
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

# Registry order doubles as the canonical report ordering.
ACTIVATION_KINDS = (
    "sigmoid",
    "tanh",
    "relu",
    "leaky_relu",
    "swish",
    "maxout",
    "elliot",
    "adapto_swelli_gauss",
)

DEFAULT_LEAKY_ALPHA = 0.01
DEFAULT_SWISH_BETA = 0.5
DEFAULT_ASG_ALPHA = 0.14
DEFAULT_ASG_SCALE = 0.5
DEFAULT_ASG_SHIFT = 0.25
# max(w*x + b) over these pieces is |x|, the minimal two-piece instance.
DEFAULT_MAXOUT_PIECES = ((1.0, 0.0), (-1.0, 0.0))


@dataclass(frozen=True)
class ActivationSpec:
    """Tagged choice of activation function plus its hyperparameters.

    Only the parameters relevant to ``kind`` are consulted; the rest keep
    their defaults so specs stay comparable and serializable.
    """

    kind: str
    leaky_alpha: float = DEFAULT_LEAKY_ALPHA
    swish_beta: float = DEFAULT_SWISH_BETA
    maxout_pieces: tuple[tuple[float, float], ...] = DEFAULT_MAXOUT_PIECES
    asg_alpha: float = DEFAULT_ASG_ALPHA
    asg_scale: float = DEFAULT_ASG_SCALE
    asg_shift: float = DEFAULT_ASG_SHIFT

    def __post_init__(self):
        if self.kind not in ACTIVATION_KINDS:
            raise ValueError(f"unknown activation kind: {self.kind!r}")
        object.__setattr__(
            self, "maxout_pieces", tuple((float(w), float(b)) for w, b in self.maxout_pieces)
        )
        scalars = (self.leaky_alpha, self.swish_beta, self.asg_alpha, self.asg_scale, self.asg_shift)
        if not all(math.isfinite(v) for v in scalars):
            raise ValueError("activation hyperparameters must be finite")
        if not all(math.isfinite(w) and math.isfinite(b) for w, b in self.maxout_pieces):
            raise ValueError("maxout pieces must be finite")
        if self.kind == "maxout" and len(self.maxout_pieces) == 0:
            raise ValueError("maxout requires at least one (weight, bias) piece")
        if self.asg_scale <= 0:
            raise ValueError("asg_scale must be > 0")


def _sigmoid(x):
    # Branch on sign to avoid exp overflow for large negative inputs.
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _swish(x, beta):
    return x * _sigmoid(beta * x)


def _elliot(x):
    return x / (1.0 + np.abs(x))


def _ssg(x, scale, shift):
    # Scaled, shifted, unit-variance Gaussian bump.
    d = x - shift
    with np.errstate(over="ignore"):
        return scale * np.exp(-d * d)


def _maxout_values(x, pieces):
    w = np.array([p[0] for p in pieces])
    b = np.array([p[1] for p in pieces])
    return w[:, None] * x[None, :] + b[:, None]


def _eval_sigmoid(x, spec):
    return _sigmoid(x)


def _eval_tanh(x, spec):
    return np.tanh(x)


def _eval_relu(x, spec):
    return np.maximum(0.0, x)


def _eval_leaky_relu(x, spec):
    return np.where(x >= 0, x, spec.leaky_alpha * x)


def _eval_swish(x, spec):
    return _swish(x, spec.swish_beta)


def _eval_maxout(x, spec):
    return _maxout_values(x, spec.maxout_pieces).max(axis=0)


def _eval_elliot(x, spec):
    return _elliot(x)


def _eval_asg(x, spec):
    swish_branch = _swish(x, spec.swish_beta)
    gauss_branch = _elliot(x) * _ssg(x, spec.asg_scale, spec.asg_shift)
    return np.where(x <= spec.asg_alpha, swish_branch, gauss_branch)


def _deriv_sigmoid(x, spec):
    s = _sigmoid(x)
    return s * (1.0 - s)


def _deriv_tanh(x, spec):
    t = np.tanh(x)
    return 1.0 - t * t


def _deriv_relu(x, spec):
    # Right-hand convention at the kink: derivative 1 at x = 0.
    return np.where(x >= 0, 1.0, 0.0)


def _deriv_leaky_relu(x, spec):
    return np.where(x >= 0, 1.0, spec.leaky_alpha)


def _swish_deriv(x, beta):
    s = _sigmoid(beta * x)
    return s + beta * x * s * (1.0 - s)


def _deriv_swish(x, spec):
    return _swish_deriv(x, spec.swish_beta)


def _deriv_maxout(x, spec):
    # Ties resolved toward the lowest piece index (np.argmax convention).
    vals = _maxout_values(x, spec.maxout_pieces)
    w = np.array([p[0] for p in spec.maxout_pieces])
    return w[np.argmax(vals, axis=0)]


def _deriv_elliot(x, spec):
    d = 1.0 + np.abs(x)
    return 1.0 / (d * d)


def _deriv_asg(x, spec):
    # At x = asg_alpha the left (Swish) branch derivative is used.
    d = x - spec.asg_shift
    ssg = _ssg(x, spec.asg_scale, spec.asg_shift)
    gauss_branch = _deriv_elliot(x, spec) * ssg + _elliot(x) * (-2.0 * d) * ssg
    return np.where(x <= spec.asg_alpha, _swish_deriv(x, spec.swish_beta), gauss_branch)


_EVAL = {
    "sigmoid": _eval_sigmoid,
    "tanh": _eval_tanh,
    "relu": _eval_relu,
    "leaky_relu": _eval_leaky_relu,
    "swish": _eval_swish,
    "maxout": _eval_maxout,
    "elliot": _eval_elliot,
    "adapto_swelli_gauss": _eval_asg,
}

_DERIV = {
    "sigmoid": _deriv_sigmoid,
    "tanh": _deriv_tanh,
    "relu": _deriv_relu,
    "leaky_relu": _deriv_leaky_relu,
    "swish": _deriv_swish,
    "maxout": _deriv_maxout,
    "elliot": _deriv_elliot,
    "adapto_swelli_gauss": _deriv_asg,
}


def _as_finite_array(xs):
    arr = np.asarray(xs, dtype=np.float64)
    if arr.ndim != 1:
        arr = np.atleast_1d(arr)
    bad = ~np.isfinite(arr)
    if bad.any():
        idx = int(np.argmax(bad))
        raise ValueError(f"non-finite activation input at index {idx}: {arr[idx]!r}")
    return arr


def evaluate(spec: ActivationSpec, x: float) -> float:
    """Evaluate the activation at a single point."""
    if not math.isfinite(x):
        raise ValueError(f"non-finite activation input: {x!r}")
    return float(_EVAL[spec.kind](np.array([x], dtype=np.float64), spec)[0])


def derivative(spec: ActivationSpec, x: float) -> float:
    """Analytic derivative of the activation at a single point."""
    if not math.isfinite(x):
        raise ValueError(f"non-finite activation input: {x!r}")
    return float(_DERIV[spec.kind](np.array([x], dtype=np.float64), spec)[0])


def batch_evaluate(spec: ActivationSpec, xs) -> np.ndarray:
    """Element-wise :func:`evaluate` over a 1-D array of inputs."""
    arr = _as_finite_array(xs)
    if arr.size == 0:
        return arr.copy()
    return _EVAL[spec.kind](arr, spec)


def batch_derivative(spec: ActivationSpec, xs) -> np.ndarray:
    """Element-wise :func:`derivative` over a 1-D array of inputs."""
    arr = _as_finite_array(xs)
    if arr.size == 0:
        return arr.copy()
    return _DERIV[spec.kind](arr, spec)


# JSON keys consulted per kind (beyond "kind" itself).
_JSON_KEYS = {
    "sigmoid": (),
    "tanh": (),
    "relu": (),
    "leaky_relu": ("leaky_alpha",),
    "swish": ("swish_beta",),
    "maxout": ("pieces",),
    "elliot": (),
    "adapto_swelli_gauss": ("alpha", "scale", "shift", "swish_beta"),
}


def spec_to_json(spec: ActivationSpec) -> dict:
    """Serialize a spec to a plain JSON-compatible dict."""
    out = {"kind": spec.kind}
    if spec.kind == "leaky_relu":
        out["leaky_alpha"] = spec.leaky_alpha
    elif spec.kind == "swish":
        out["swish_beta"] = spec.swish_beta
    elif spec.kind == "maxout":
        out["pieces"] = [list(p) for p in spec.maxout_pieces]
    elif spec.kind == "adapto_swelli_gauss":
        out["alpha"] = spec.asg_alpha
        out["scale"] = spec.asg_scale
        out["shift"] = spec.asg_shift
        out["swish_beta"] = spec.swish_beta
    return out


def spec_from_json(obj: dict) -> ActivationSpec:
    """Parse a spec from a JSON dict, rejecting unknown kinds and keys."""
    if not isinstance(obj, dict):
        raise ValueError(f"activation spec must be a JSON object, got {type(obj).__name__}")
    kind = obj.get("kind")
    if kind not in ACTIVATION_KINDS:
        raise ValueError(f"unknown activation kind: {kind!r}")
    allowed = {"kind", *_JSON_KEYS[kind]}
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ValueError(f"unexpected keys for activation {kind!r}: {extra}")
    kwargs = {}
    if kind == "leaky_relu" and "leaky_alpha" in obj:
        kwargs["leaky_alpha"] = float(obj["leaky_alpha"])
    if kind == "swish" and "swish_beta" in obj:
        kwargs["swish_beta"] = float(obj["swish_beta"])
    if kind == "maxout" and "pieces" in obj:
        kwargs["maxout_pieces"] = tuple((float(w), float(b)) for w, b in obj["pieces"])
    if kind == "adapto_swelli_gauss":
        if "alpha" in obj:
            kwargs["asg_alpha"] = float(obj["alpha"])
        if "scale" in obj:
            kwargs["asg_scale"] = float(obj["scale"])
        if "shift" in obj:
            kwargs["asg_shift"] = float(obj["shift"])
        if "swish_beta" in obj:
            kwargs["swish_beta"] = float(obj["swish_beta"])
    return ActivationSpec(kind=kind, **kwargs)


def calibrated_spec(spec: ActivationSpec, preactivations) -> ActivationSpec:
    """Optional hyperparameter calibration from hidden-layer pre-activations.

    Re-centers the tunable constants on the median of the observed
    pre-activation distribution: swish_beta for swish, and additionally
    asg_alpha / asg_scale / asg_shift for adapto_swelli_gauss.  The scale
    parameter keeps its previous value when the median is non-positive
    (it must stay > 0).  Other kinds are returned unchanged.
    """
    z = np.asarray(preactivations, dtype=np.float64).ravel()
    if z.size == 0 or not np.isfinite(z).all():
        raise ValueError("calibration requires a non-empty finite sample")
    m = float(np.median(z))
    if spec.kind == "swish":
        return ActivationSpec(kind="swish", swish_beta=m)
    if spec.kind == "adapto_swelli_gauss":
        scale = m if m > 0 else spec.asg_scale
        return ActivationSpec(
            kind="adapto_swelli_gauss",
            swish_beta=m,
            asg_alpha=m,
            asg_scale=scale,
            asg_shift=m,
        )
    return spec

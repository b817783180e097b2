import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swarmtraj.activations import (
    ACTIVATION_KINDS,
    ActivationSpec,
    batch_derivative,
    batch_evaluate,
    derivative,
    evaluate,
    calibrated_spec,
    spec_from_json,
    spec_to_json,
)

ALL_SPECS = {kind: ActivationSpec(kind) for kind in ACTIVATION_KINDS}

# Points within this distance of a non-smooth switch are excluded from
# finite-difference comparisons.
SWITCH_EXCLUSION = 1e-4
SWITCH_POINTS = {
    "relu": (0.0,),
    "leaky_relu": (0.0,),
    "maxout": (0.0,),  # default |x| pieces cross at 0
    "adapto_swelli_gauss": (0.14,),
}


def central_diff(spec, x, h=1e-6):
    return (evaluate(spec, x + h) - evaluate(spec, x - h)) / (2.0 * h)


def test_evaluate_known_points():
    assert evaluate(ALL_SPECS["sigmoid"], 0.0) == 0.5
    assert evaluate(ALL_SPECS["tanh"], 0.0) == 0.0
    assert evaluate(ALL_SPECS["relu"], -2.0) == 0.0
    assert evaluate(ALL_SPECS["elliot"], 1.0) == 0.5
    assert evaluate(ALL_SPECS["swish"], 0.0) == 0.0
    assert evaluate(ALL_SPECS["adapto_swelli_gauss"], 0.0) == 0.0


def test_asg_above_threshold_value():
    # Elliot(1) * scale * exp(-(1 - shift)^2), evaluated independently.
    expected = (1.0 / 2.0) * 0.5 * math.exp(-((1.0 - 0.25) ** 2))
    got = evaluate(ALL_SPECS["adapto_swelli_gauss"], 1.0)
    assert got == pytest.approx(expected, rel=1e-14)
    assert got == pytest.approx(0.14244570618273075, rel=1e-14)


def test_asg_branch_selection():
    spec = ALL_SPECS["adapto_swelli_gauss"]
    swish = ALL_SPECS["swish"]
    for x in (-3.0, -0.5, 0.0, 0.139, 0.14):
        assert evaluate(spec, x) == evaluate(swish, x)  # bit-identical Swish branch
    for x in (0.1401, 0.5, 2.0, 10.0):
        expected = (x / (1 + abs(x))) * 0.5 * math.exp(-((x - 0.25) ** 2))
        assert evaluate(spec, x) == pytest.approx(expected, abs=1e-15)


def test_derivative_known_points():
    assert derivative(ALL_SPECS["sigmoid"], 0.0) == 0.25
    assert derivative(ALL_SPECS["relu"], 3.0) == 1.0
    t = derivative(ALL_SPECS["tanh"], 1.0)
    assert t == pytest.approx(1.0 - math.tanh(1.0) ** 2, rel=1e-12)
    assert t == pytest.approx(central_diff(ALL_SPECS["tanh"], 1.0), rel=1e-6)


def test_derivative_switch_conventions():
    # Kink values follow the documented conventions, not averages.
    assert derivative(ALL_SPECS["relu"], 0.0) == 1.0
    assert derivative(ALL_SPECS["leaky_relu"], 0.0) == 1.0
    spec = ALL_SPECS["adapto_swelli_gauss"]
    assert derivative(spec, 0.14) == derivative(ALL_SPECS["swish"], 0.14)


@pytest.mark.parametrize("kind", ACTIVATION_KINDS)
def test_derivative_matches_finite_differences(kind):
    spec = ALL_SPECS[kind]
    rng = np.random.default_rng(11)
    xs = rng.uniform(-4.0, 4.0, size=1000)
    for sw in SWITCH_POINTS.get(kind, ()):
        xs = xs[np.abs(xs - sw) > SWITCH_EXCLUSION]
    analytic = batch_derivative(spec, xs)
    fd = np.array([central_diff(spec, float(x)) for x in xs])
    np.testing.assert_allclose(analytic, fd, rtol=1e-5, atol=1e-8)


def test_range_bounds():
    rng = np.random.default_rng(5)
    xs = rng.uniform(-10.0, 10.0, size=2000)
    sig = batch_evaluate(ALL_SPECS["sigmoid"], xs)
    assert ((sig > 0.0) & (sig < 1.0)).all()
    for kind in ("tanh", "elliot"):
        vals = batch_evaluate(ALL_SPECS[kind], xs)
        assert ((vals > -1.0) & (vals < 1.0)).all()


def test_relu_exact():
    rng = np.random.default_rng(6)
    xs = rng.normal(size=500)
    np.testing.assert_array_equal(batch_evaluate(ALL_SPECS["relu"], xs), xs * (xs > 0))


def test_maxout_default_is_abs():
    xs = np.linspace(-5, 5, 101)
    np.testing.assert_array_equal(batch_evaluate(ALL_SPECS["maxout"], xs), np.abs(xs))
    # at the tie x=0 the first piece (w=+1) wins
    assert derivative(ALL_SPECS["maxout"], 0.0) == 1.0


def test_asg_one_sided_limits_finite():
    spec = ALL_SPECS["adapto_swelli_gauss"]
    alpha = spec.asg_alpha
    eps = np.array([1e-6, 1e-8, 1e-10, 1e-12])
    left = batch_evaluate(spec, alpha - eps)
    right = batch_evaluate(spec, alpha + eps)
    assert np.isfinite(left).all() and np.isfinite(right).all()
    left_limit = evaluate(ALL_SPECS["swish"], alpha)
    right_limit = (alpha / (1 + alpha)) * 0.5 * math.exp(-((alpha - 0.25) ** 2))
    np.testing.assert_allclose(left, left_limit, atol=1e-6)
    np.testing.assert_allclose(right, right_limit, atol=1e-6)
    # the function genuinely jumps at alpha for the published constants
    assert abs(left_limit - right_limit) > 1e-3


def test_asg_bounds_on_grid():
    spec = ALL_SPECS["adapto_swelli_gauss"]
    grid = np.linspace(-100.0, 100.0, 20001)
    vals = batch_evaluate(spec, grid)
    assert np.isfinite(vals).all()
    # Swish branch is bounded below by the analytic Swish minimum.
    swish_min = -0.2784645427610738 / spec.swish_beta
    assert vals[grid <= spec.asg_alpha].min() >= swish_min - 1e-12
    # Elliot * Gaussian branch is bounded by the Gaussian scale.
    assert np.abs(vals[grid > spec.asg_alpha]).max() <= spec.asg_scale
    # With the switch pushed past the grid, the Swish branch grows without bound.
    high = ActivationSpec("adapto_swelli_gauss", asg_alpha=1000.0)
    tail = batch_evaluate(high, np.array([10.0, 50.0, 100.0, 500.0]))
    assert (np.diff(tail) > 0).all() and tail[-1] > 400.0


@given(st.lists(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False), max_size=50),
       st.sampled_from(ACTIVATION_KINDS))
@settings(max_examples=200, deadline=None)
def test_batch_matches_pointwise(xs, kind):
    spec = ALL_SPECS[kind]
    batch = batch_evaluate(spec, np.array(xs, dtype=np.float64))
    single = np.array([evaluate(spec, x) for x in xs])
    np.testing.assert_array_equal(batch, single)


def test_batch_empty():
    out = batch_evaluate(ALL_SPECS["sigmoid"], np.array([]))
    assert out.shape == (0,)


def test_batch_examples():
    np.testing.assert_array_equal(
        batch_evaluate(ALL_SPECS["relu"], np.array([-1.0, 0.0, 2.0])), [0.0, 0.0, 2.0])
    np.testing.assert_array_equal(
        batch_evaluate(ALL_SPECS["elliot"], np.array([-1.0, 1.0])), [-0.5, 0.5])


def test_non_finite_inputs_rejected():
    with pytest.raises(ValueError):
        evaluate(ALL_SPECS["sigmoid"], float("nan"))
    with pytest.raises(ValueError):
        derivative(ALL_SPECS["tanh"], float("inf"))
    with pytest.raises(ValueError, match="index 2"):
        batch_evaluate(ALL_SPECS["relu"], np.array([0.0, 1.0, np.nan, 2.0]))


def test_spec_validation():
    with pytest.raises(ValueError, match="unknown activation kind"):
        ActivationSpec("gelu")
    with pytest.raises(ValueError):
        ActivationSpec("maxout", maxout_pieces=())
    with pytest.raises(ValueError):
        ActivationSpec("adapto_swelli_gauss", asg_scale=0.0)
    with pytest.raises(ValueError):
        ActivationSpec("swish", swish_beta=float("nan"))


@pytest.mark.parametrize("kind", ACTIVATION_KINDS)
def test_json_round_trip(kind):
    spec = ALL_SPECS[kind]
    assert spec_from_json(spec_to_json(spec)) == spec


def test_json_round_trip_custom():
    spec = ActivationSpec("adapto_swelli_gauss", asg_alpha=0.2, asg_scale=1.5,
                          asg_shift=-0.1, swish_beta=2.0)
    assert spec_from_json(spec_to_json(spec)) == spec
    spec = ActivationSpec("maxout", maxout_pieces=((0.5, 1.0), (2.0, -1.0), (1.0, 0.0)))
    assert spec_from_json(spec_to_json(spec)) == spec


def test_json_rejects_unknown_kind_and_keys():
    with pytest.raises(ValueError, match="'adapto_swelly_gauss'"):
        spec_from_json({"kind": "adapto_swelly_gauss"})
    with pytest.raises(ValueError, match="swish_beta"):
        spec_from_json({"kind": "sigmoid", "swish_beta": 1.0})


def test_json_example_form():
    spec = spec_from_json({"kind": "adapto_swelli_gauss", "alpha": 0.14,
                           "scale": 0.5, "shift": 0.25, "swish_beta": 0.5})
    assert spec == ALL_SPECS["adapto_swelli_gauss"]


def test_calibration():
    z = np.array([-1.0, 0.0, 1.0, 2.0, 3.0])
    spec = calibrated_spec(ALL_SPECS["adapto_swelli_gauss"], z)
    assert spec.asg_alpha == 1.0 and spec.asg_scale == 1.0
    assert spec.asg_shift == 1.0 and spec.swish_beta == 1.0
    # non-positive median cannot become the Gaussian scale
    spec = calibrated_spec(ALL_SPECS["adapto_swelli_gauss"], -z)
    assert spec.asg_scale == 0.5 and spec.asg_alpha == -1.0
    # kinds without tunable constants pass through
    assert calibrated_spec(ALL_SPECS["relu"], z) == ALL_SPECS["relu"]

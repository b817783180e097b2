import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swarmtraj.metrics import MetricResult, aggregate, compute_all

finite_vec = st.lists(
    st.floats(min_value=-1e6, max_value=1e6, allow_nan=False), min_size=1, max_size=40
)


def test_perfect_prediction_is_zero():
    r = compute_all([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert r.mse == r.rmse == r.mae == r.smape == 0.0
    assert r.mape == 0.0 and not r.mape_undefined


def test_hand_computed_values():
    # ((0-1)^2 + (2-1)^2) / 2 = 1; the y=0 term is skipped for MAPE
    r = compute_all([0.0, 2.0], [1.0, 1.0])
    assert r.mse == 1.0 and r.rmse == 1.0 and r.mae == 1.0
    assert r.mape == pytest.approx(50.0)  # only the y=2 term survives
    assert r.mape_undefined and r.mape_skipped == 1


def test_smape_hand_computed():
    r = compute_all([1.0], [3.0])
    assert r.smape == pytest.approx(2.0 * 2.0 / 4.0 * 100.0)  # 100%


def test_smape_both_zero_term():
    r = compute_all([0.0, 1.0], [0.0, 1.0])
    assert r.smape == 0.0
    assert r.smape_undefined and r.smape_zero_terms == 1


def test_mape_all_terms_skipped():
    r = compute_all([0.0, 0.0], [1.0, 2.0])
    assert math.isnan(r.mape) and r.mape_undefined
    assert r.to_dict()["mape"] is None


def test_input_validation():
    with pytest.raises(ValueError):
        compute_all([], [])
    with pytest.raises(ValueError):
        compute_all([1.0, 2.0], [1.0])
    with pytest.raises(ValueError):
        compute_all([1.0, np.nan], [1.0, 2.0])


@given(finite_vec, finite_vec)
@settings(max_examples=200, deadline=None)
def test_symmetry_and_bounds(a, b):
    n = min(len(a), len(b))
    a, b = a[:n], b[:n]
    if n == 0:
        return
    r1 = compute_all(a, b)
    r2 = compute_all(b, a)
    assert r1.mse == pytest.approx(r2.mse, rel=1e-12, abs=1e-300)
    assert r1.smape == pytest.approx(r2.smape, rel=1e-12, abs=1e-300)
    assert 0.0 <= r1.smape <= 200.0 + 1e-9
    assert r1.mse >= 0 and r1.mae >= 0 and r1.rmse >= 0
    assert r1.rmse**2 == pytest.approx(r1.mse, rel=1e-12, abs=1e-300)


@given(finite_vec, st.floats(min_value=1e-3, max_value=1e3))
@settings(max_examples=200, deadline=None)
def test_scaling_behaviour(a, c):
    b = [v + 1.0 for v in a]
    r1 = compute_all(a, b)
    r2 = compute_all([c * v for v in a], [c * v for v in b])
    assert r2.mae == pytest.approx(c * r1.mae, rel=1e-9)
    assert r2.rmse == pytest.approx(c * r1.rmse, rel=1e-9)
    assert r2.smape == pytest.approx(r1.smape, rel=1e-9)
    if not r1.mape_undefined:
        assert r2.mape == pytest.approx(r1.mape, rel=1e-9)


def test_zero_iff_equal():
    r = compute_all([1.0, 2.0], [1.0, 2.0 + 1e-9])
    assert r.mse > 0 and r.mae > 0


def test_aggregate_single_and_identical():
    r = compute_all([1.0, 2.0], [1.5, 2.5])
    agg = aggregate([r])
    assert agg == r
    agg2 = aggregate([r, r])
    assert agg2.mse == r.mse and agg2.smape == r.smape


def test_aggregate_mean_and_rmse_consistency():
    r1 = compute_all([0.0, 2.0], [1.0, 1.0])  # mse 1
    r2 = compute_all([math.sqrt(3.0)], [0.0])  # mse 3
    agg = aggregate([r1, r2])
    assert agg.mse == pytest.approx(2.0, rel=1e-12)
    assert agg.rmse == pytest.approx(math.sqrt(2.0), rel=1e-12)
    assert agg.rmse**2 == pytest.approx(agg.mse, rel=1e-12)


def test_aggregate_flag_propagation():
    clean = compute_all([1.0], [2.0])
    flagged = compute_all([0.0, 1.0], [1.0, 1.0])
    agg = aggregate([clean, flagged])
    assert agg.mape_undefined
    assert not aggregate([clean, clean]).mape_undefined


def test_aggregate_empty_rejected():
    with pytest.raises(ValueError):
        aggregate([])

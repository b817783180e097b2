"""Regression error metrics: MSE, RMSE, MAE, MAPE, and SMAPE.

MAPE terms with a zero actual value are skipped (and counted); SMAPE terms
where both values are zero contribute 0 (and are counted).  Either guard
firing marks the corresponding metric as "undefined" so downstream reports
can flag it instead of silently hiding the singularity.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np


@dataclass(frozen=True)
class MetricResult:
    mse: float
    rmse: float
    mae: float
    mape: float  # percent; NaN when every term was skipped
    smape: float  # percent in [0, 200]
    mape_skipped: int = 0  # terms dropped because the actual value was 0
    smape_zero_terms: int = 0  # 0/0 terms defined as 0

    @property
    def mape_undefined(self) -> bool:
        return self.mape_skipped > 0

    @property
    def smape_undefined(self) -> bool:
        return self.smape_zero_terms > 0

    def to_dict(self) -> dict:
        return {
            "mse": self.mse,
            "rmse": self.rmse,
            "mae": self.mae,
            "mape": None if math.isnan(self.mape) else self.mape,
            "smape": self.smape,
            "mape_undefined": self.mape_undefined,
            "smape_undefined": self.smape_undefined,
            "mape_skipped": self.mape_skipped,
            "smape_zero_terms": self.smape_zero_terms,
        }


def compute_all(actual, predicted) -> MetricResult:
    """All five metrics over a pair of equal-length vectors."""
    y = np.asarray(actual, dtype=np.float64)
    p = np.asarray(predicted, dtype=np.float64)
    if y.ndim != 1 or p.ndim != 1:
        raise ValueError("metric inputs must be 1-D vectors")
    if y.size == 0:
        raise ValueError("metric inputs must be non-empty")
    if y.shape != p.shape:
        raise ValueError(f"length mismatch: actual {y.size} vs predicted {p.size}")
    if not (np.isfinite(y).all() and np.isfinite(p).all()):
        raise ValueError("metric inputs must be finite")

    diff = y - p
    mse = float(np.mean(diff * diff))
    rmse = math.sqrt(mse)
    mae = float(np.mean(np.abs(diff)))

    nonzero = y != 0
    mape_skipped = int(y.size - np.count_nonzero(nonzero))
    if nonzero.any():
        # near-zero actuals legitimately blow MAPE up toward inf
        with np.errstate(over="ignore"):
            mape = float(np.mean(np.abs(diff[nonzero] / y[nonzero])) * 100.0)
    else:
        mape = float("nan")

    denom = np.abs(y) + np.abs(p)
    both_zero = denom == 0
    terms = np.zeros_like(denom)
    np.divide(2.0 * np.abs(diff), denom, out=terms, where=~both_zero)
    smape = float(np.mean(terms) * 100.0)

    return MetricResult(
        mse=mse,
        rmse=rmse,
        mae=mae,
        mape=mape,
        smape=smape,
        mape_skipped=mape_skipped,
        smape_zero_terms=int(np.count_nonzero(both_zero)),
    )


def aggregate(per_sample: list[MetricResult]) -> MetricResult:
    """Unweighted mean across samples.

    RMSE is recomputed as sqrt(mean MSE) so the rmse**2 == mse contract
    holds for aggregates too; the other metrics are plain means.  Guard
    counters are summed, so undefined flags propagate.
    """
    if not per_sample:
        raise ValueError("aggregate requires a non-empty list of results")
    mse = float(np.mean([r.mse for r in per_sample]))
    return MetricResult(
        mse=mse,
        rmse=math.sqrt(mse),
        mae=float(np.mean([r.mae for r in per_sample])),
        mape=float(np.mean([r.mape for r in per_sample])),
        smape=float(np.mean([r.smape for r in per_sample])),
        mape_skipped=sum(r.mape_skipped for r in per_sample),
        smape_zero_terms=sum(r.smape_zero_terms for r in per_sample),
    )

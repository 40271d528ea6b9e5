"""Record-based trend extrapolation and milestone forecasting.

Each metric is reduced to its "world record" subsequence (sparse maximum
for qubit counts, sparse minimum for error rates), fitted with a separate
log-linear trend, and the two trends are combined through the GLQ map to
locate milestone crossing dates.  Uncertainty comes from a seeded
bootstrap over the underlying announcements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .dataset import Dataset, FilterSpec, apply_filter
from .errors import InstabilityError, InsufficientDataError
from .glq import DEFAULT_QEC, QecParams

__all__ = [
    "RecordSeries",
    "UnivariateFit",
    "ForecastConfig",
    "Trajectory",
    "MilestoneForecast",
    "extract_records",
    "fit_loglinear",
    "glq_trajectory",
    "crossing_time",
    "bootstrap_trend_fits",
    "bootstrap_forecast",
    "gaussian_noise_band",
    "simple_glq_fit",
    "RecordTrendForecaster",
]

_GRID_STEP_YEARS = 30.0 / 365.0


@dataclass(frozen=True)
class RecordSeries:
    """Strictly improving (year, log value) subsequence of one metric."""

    points: tuple[tuple[float, float], ...]
    orientation: str  # "max" | "min"

    def __post_init__(self):
        if self.orientation not in ("max", "min"):
            raise ValueError(f"orientation must be 'max' or 'min', got {self.orientation}")
        years = [p[0] for p in self.points]
        if any(b <= a for a, b in zip(years, years[1:])):
            raise ValueError("record years must be strictly increasing")
        values = [p[1] for p in self.points]
        pairs = zip(values, values[1:])
        ok = (
            all(b > a for a, b in pairs)
            if self.orientation == "max"
            else all(b < a for a, b in pairs)
        )
        if not ok:
            raise ValueError("record values must strictly improve")

    def __len__(self):
        return len(self.points)


def extract_records(
    points: Sequence[tuple[float, float]],
    orientation: str,
    record_ids: Optional[Sequence] = None,
) -> RecordSeries:
    """Sparse max/min: keep only points strictly improving the running best.

    Points are scanned in ascending (year, record_id) order; ids default to
    input position, so ties in value and duplicate years resolve
    deterministically.
    """
    if orientation not in ("max", "min"):
        raise ValueError(f"orientation must be 'max' or 'min', got {orientation}")
    ids = record_ids if record_ids is not None else range(len(points))
    ordered = sorted(zip(points, ids), key=lambda item: (item[0][0], item[1]))
    best = None
    kept: list[tuple[float, float]] = []
    for (year, value), _ in ordered:
        if value <= 0:
            raise ValueError(f"metric values must be positive, got {value}")
        improves = best is None or (value > best if orientation == "max" else value < best)
        if improves:
            # A same-year improvement replaces the year's provisional record.
            if kept and kept[-1][0] == year:
                kept[-1] = (year, math.log(value))
            else:
                kept.append((year, math.log(value)))
            best = value
    return RecordSeries(points=tuple(kept), orientation=orientation)


@dataclass(frozen=True)
class UnivariateFit:
    """Least-squares line through one metric's records in log space."""

    intercept: float
    slope: float
    sigma2: float
    n_records: int

    def predict_log(self, t):
        return self.intercept + self.slope * np.asarray(t, dtype=float)


def _fit_line(years: np.ndarray, logs: np.ndarray) -> UnivariateFit:
    n = len(years)
    if n < 2 or np.ptp(years) < 1e-9:
        raise InsufficientDataError(
            f"need at least 2 records with distinct years, have {n}"
        )
    offset = years.mean()
    Xc = np.column_stack([np.ones(n), years - offset])
    coef, *_ = np.linalg.lstsq(Xc, logs, rcond=None)
    resid = logs - Xc @ coef
    sigma2 = float(resid @ resid) / (n - 1)
    return UnivariateFit(
        intercept=float(coef[0] - offset * coef[1]),
        slope=float(coef[1]),
        sigma2=sigma2,
        n_records=n,
    )


def fit_loglinear(series: RecordSeries) -> UnivariateFit:
    """Fit the record series with an (n-1)-divisor residual variance."""
    years = np.array([p[0] for p in series.points])
    logs = np.array([p[1] for p in series.points])
    return _fit_line(years, logs)


@dataclass(frozen=True)
class ForecastConfig:
    """Everything needed to reproduce one forecasting run."""

    thresholds: tuple[float, ...] = (1.0, 4100.0)
    resamples: int = 1000
    seed: int = 0
    quantiles: tuple[float, ...] = (0.05, 0.5, 0.95)
    horizon_end: float = 2100.0
    aggregation: str = "record"  # "record" | "raw"
    window: Optional[FilterSpec] = None
    qec: QecParams = field(default_factory=QecParams)

    def __post_init__(self):
        if self.aggregation not in ("record", "raw"):
            raise ValueError(f"aggregation must be 'record' or 'raw', got {self.aggregation}")
        if any(t <= 0 for t in self.thresholds) or any(
            b <= a for a, b in zip(self.thresholds, self.thresholds[1:])
        ):
            raise ValueError("thresholds must be positive and ascending")
        if any(not 0.0 < q < 1.0 for q in self.quantiles) or any(
            b <= a for a, b in zip(self.quantiles, self.quantiles[1:])
        ):
            raise ValueError("quantiles must be ascending and lie in (0, 1)")


def glq_trajectory(
    fit_qubits: UnivariateFit,
    fit_error: UnivariateFit,
    qec: QecParams = DEFAULT_QEC,
    t=0.0,
):
    """GLQ along the two fitted trends; 0 wherever the error trend is at or
    above threshold.  Vectorized over t."""
    t = np.asarray(t, dtype=float)
    log_n = fit_qubits.predict_log(t)
    log_p = fit_error.predict_log(t)
    # Far below p_L/sqrt(10) the overhead formula leaves its validity
    # regime; the overhead saturates at 1 there, so clamp.
    log_p_floor = math.log(qec.p_L / math.sqrt(10.0))
    log_p = np.maximum(log_p, np.nextafter(log_p_floor, math.inf))
    num = np.log(math.sqrt(10.0)) + log_p - math.log(qec.p_L)
    den = math.log(qec.p_th) - log_p
    below = log_p < math.log(qec.p_th)
    f = np.zeros_like(num)
    f[below] = (4.0 * num[below] / den[below] + 1.0) ** -2
    return np.exp(log_n) * f


def crossing_time(
    fit_qubits: UnivariateFit,
    fit_error: UnivariateFit,
    qec: QecParams,
    threshold: float,
    window: tuple[float, float],
    tol: float = 1.0 / 365.0,
) -> Optional[float]:
    """Earliest t in the window with GLQ(t) > threshold, or None.

    A coarse grid scan (step <= 30 days) locates the first crossing cell;
    bisection then narrows it to the requested tolerance.  The scan is
    robust to the jump from 0 where the error trend passes the threshold.
    """
    t0, t1 = window
    if not t0 < t1:
        raise ValueError(f"window start {t0} must precede end {t1}")
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    n_steps = int(math.ceil((t1 - t0) / _GRID_STEP_YEARS)) + 1
    grid = np.linspace(t0, t1, n_steps)
    above = glq_trajectory(fit_qubits, fit_error, qec, grid) > threshold
    hits = np.flatnonzero(above)
    if hits.size == 0:
        return None
    i = int(hits[0])
    if i == 0:
        return float(grid[0])
    lo, hi = float(grid[i - 1]), float(grid[i])
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if glq_trajectory(fit_qubits, fit_error, qec, mid) > threshold:
            hi = mid
        else:
            lo = mid
    return hi


def _resample_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=(seed, index)))


def _metric_points(records) -> tuple[list, list]:
    qubit_points = [(r.fractional_year, float(r.physical_qubits), r.record_id)
                    for r in records]
    error_points = [(r.fractional_year, r.gate_error_rate, r.record_id)
                    for r in records if r.gate_error_rate is not None]
    return qubit_points, error_points


def _fit_metric(points, orientation: str, aggregation: str) -> tuple[UnivariateFit, int]:
    if aggregation == "record":
        series = extract_records(
            [(t, v) for t, v, _ in points],
            orientation,
            record_ids=[rid for _, _, rid in points],
        )
        return fit_loglinear(series), len(series)
    years = np.array([t for t, _, _ in points])
    logs = np.log(np.array([v for _, v, _ in points]))
    return _fit_line(years, logs), len(points)


def bootstrap_trend_fits(
    dataset: Dataset, config: ForecastConfig
) -> tuple[list[tuple[UnivariateFit, UnivariateFit]], dict]:
    """Per-resample (qubit trend, error trend) fit pairs plus diagnostics.

    Each resample draws n records with replacement; degenerate draws (too
    few distinct record years for either metric) are redrawn from the same
    per-index stream and counted.
    """
    view = apply_filter(dataset, config.window) if config.window else dataset
    records = view.records
    n = len(records)
    if n == 0:
        raise InsufficientDataError("filtered dataset is empty")
    # With fewer than two distinct years per metric no resample can ever
    # support a trend fit; that is a data inadequacy, not instability.
    qubit_years = {r.fractional_year for r in records}
    error_years = {r.fractional_year for r in records
                   if r.gate_error_rate is not None}
    if len(qubit_years) < 2 or len(error_years) < 2:
        raise InsufficientDataError(
            "need records at two distinct years for each metric to fit trends"
        )
    fits: list[tuple[UnivariateFit, UnivariateFit]] = []
    record_counts_q: list[int] = []
    record_counts_e: list[int] = []
    redraws = 0
    for i in range(config.resamples):
        rng = _resample_rng(config.seed, i)
        for _ in range(1000):
            idx = rng.integers(0, n, size=n)
            sample = [records[j] for j in idx]
            qubit_points, error_points = _metric_points(sample)
            try:
                fit_q, n_q = _fit_metric(qubit_points, "max", config.aggregation)
                fit_e, n_e = _fit_metric(error_points, "min", config.aggregation)
            except InsufficientDataError:
                redraws += 1
                continue
            fits.append((fit_q, fit_e))
            record_counts_q.append(n_q)
            record_counts_e.append(n_e)
            break
        else:
            raise InstabilityError(
                "all redraws degenerate; dataset cannot support the bootstrap"
            )
    diagnostics = {
        "n": n,
        "redraws": redraws,
        "median_qubit_records": float(np.median(record_counts_q)),
        "median_error_records": float(np.median(record_counts_e)),
        "data_start": min(r.fractional_year for r in records),
        "data_end": max(r.fractional_year for r in records),
    }
    return fits, diagnostics


@dataclass(frozen=True)
class Trajectory:
    """One bootstrap draw's GLQ-vs-time curve and its crossing date."""

    times: tuple[float, ...]
    glq: tuple[float, ...]
    fit_qubits: UnivariateFit
    fit_error: UnivariateFit
    crossing: Optional[float]
    draw_index: int


@dataclass(frozen=True)
class MilestoneForecast:
    """Crossing-time quantiles per threshold plus representative curves."""

    thresholds: tuple[float, ...]
    quantile_levels: tuple[float, ...]
    crossing_quantiles: dict
    trajectories: dict
    diagnostics: dict
    config: ForecastConfig
    crossing_samples: dict
    sample_fits: tuple


def _censored_quantile(sorted_values: np.ndarray, q: float) -> float:
    """Linear-interpolation quantile that tolerates +inf censoring."""
    n = len(sorted_values)
    pos = q * (n - 1)
    lo = int(math.floor(pos))
    hi = int(math.ceil(pos))
    if math.isinf(sorted_values[lo]) or math.isinf(sorted_values[hi]):
        return math.inf
    frac = pos - lo
    return float(sorted_values[lo] * (1.0 - frac) + sorted_values[hi] * frac)


def bootstrap_forecast(dataset: Dataset, config: ForecastConfig) -> MilestoneForecast:
    """Bootstrap distribution of milestone crossing dates.

    Crossings not reached by the horizon are censored at +inf, so upper
    quantiles can legitimately report "not reached".  Deterministic given
    the seed.
    """
    fits, diagnostics = bootstrap_trend_fits(dataset, config)
    t_start = diagnostics["data_start"]
    search_window = (t_start, config.horizon_end)
    curve_times = np.arange(math.floor(t_start), config.horizon_end + 0.25, 0.25)

    crossing_samples = {}
    crossing_quantiles = {}
    trajectories = {}
    censored = {}
    for threshold in config.thresholds:
        times = np.array(
            [
                t if (t := crossing_time(fq, fe, config.qec, threshold, search_window))
                is not None
                else math.inf
                for fq, fe in fits
            ]
        )
        crossing_samples[threshold] = times
        order = np.argsort(times, kind="stable")
        sorted_times = times[order]
        qvals = tuple(_censored_quantile(sorted_times, q) for q in config.quantiles)
        crossing_quantiles[threshold] = qvals
        censored[threshold] = int(np.sum(np.isinf(times)))
        per_quantile = {}
        for q, qv in zip(config.quantiles, qvals):
            if math.isinf(qv):
                candidates = np.flatnonzero(np.isinf(times))
            else:
                gaps = np.abs(times - qv)
                gaps[np.isinf(times)] = math.inf
                candidates = np.flatnonzero(gaps == gaps.min())
            j = int(candidates[0])
            fq, fe = fits[j]
            glq_curve = glq_trajectory(fq, fe, config.qec, curve_times)
            per_quantile[q] = Trajectory(
                times=tuple(float(t) for t in curve_times),
                glq=tuple(float(v) for v in glq_curve),
                fit_qubits=fq,
                fit_error=fe,
                crossing=None if math.isinf(times[j]) else float(times[j]),
                draw_index=j,
            )
        trajectories[threshold] = per_quantile
    diagnostics["censored"] = censored
    return MilestoneForecast(
        thresholds=config.thresholds,
        quantile_levels=config.quantiles,
        crossing_quantiles=crossing_quantiles,
        trajectories=trajectories,
        diagnostics=diagnostics,
        config=config,
        crossing_samples=crossing_samples,
        sample_fits=tuple(fits),
    )


def gaussian_noise_band(
    fit_qubits: UnivariateFit,
    fit_error: UnivariateFit,
    qec: QecParams,
    quantile: float,
    grid,
) -> tuple[np.ndarray, np.ndarray]:
    """(lower, upper) GLQ curves from the fitted log-Gaussian noise.

    The offset z(quantile)*sigma_i is applied symmetrically in log-metric
    space: the upper curve pairs more qubits with less error, the lower
    curve the reverse.
    """
    if not 0.0 < quantile < 1.0:
        raise ValueError(f"quantile must lie in (0, 1), got {quantile}")
    z = abs(NormalDist().inv_cdf(quantile))
    s_q = math.sqrt(fit_qubits.sigma2)
    s_e = math.sqrt(fit_error.sigma2)
    grid = np.asarray(grid, dtype=float)

    def shifted(dq, de):
        fq = UnivariateFit(fit_qubits.intercept + dq, fit_qubits.slope,
                           fit_qubits.sigma2, fit_qubits.n_records)
        fe = UnivariateFit(fit_error.intercept + de, fit_error.slope,
                           fit_error.sigma2, fit_error.n_records)
        return glq_trajectory(fq, fe, qec, grid)

    upper = shifted(+z * s_q, -z * s_e)
    lower = shifted(-z * s_q, +z * s_e)
    return lower, upper


def simple_glq_fit(dataset: Dataset, qec: QecParams = DEFAULT_QEC) -> UnivariateFit:
    """Log-linear fit of the GLQ index itself, using only the records for
    which it is defined (error rate below threshold)."""
    points = []
    for r in dataset.records:
        if r.gate_error_rate is not None and r.gate_error_rate < qec.p_th:
            from .glq import generalized_logical_qubits

            glq = generalized_logical_qubits(r.physical_qubits, r.gate_error_rate, qec)
            points.append((r.fractional_year, glq.value))
    if len(points) < 2:
        raise InsufficientDataError(
            f"need at least 2 records with defined GLQ, have {len(points)}"
        )
    years = np.array([t for t, _ in points])
    logs = np.log(np.array([v for _, v in points]))
    return _fit_line(years, logs)


class RecordTrendForecaster(BaseEstimator):
    """Estimator wrapper: fit on a Dataset, predict GLQ along the median
    bootstrap trajectory."""

    def __init__(self, config: ForecastConfig = ForecastConfig()):
        self.config = config

    def fit(self, dataset: Dataset, y=None):
        self.forecast_ = bootstrap_forecast(dataset, self.config)
        view = (
            apply_filter(dataset, self.config.window)
            if self.config.window
            else dataset
        )
        qubit_points, error_points = _metric_points(view.records)
        self.fit_qubits_, _ = _fit_metric(qubit_points, "max", self.config.aggregation)
        self.fit_error_, _ = _fit_metric(error_points, "min", self.config.aggregation)
        return self

    def predict(self, times):
        if not hasattr(self, "forecast_"):
            raise NotFittedError("RecordTrendForecaster is not fitted yet")
        threshold = self.config.thresholds[0]
        median_q = self.config.quantiles[len(self.config.quantiles) // 2]
        traj = self.forecast_.trajectories[threshold][median_q]
        return glq_trajectory(traj.fit_qubits, traj.fit_error, self.config.qec, times)

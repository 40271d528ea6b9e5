"""Multivariate log-linear model of how announcements score on both metrics.

Fitting the two log metrics jointly against the date yields a 2x2 drift
matrix and a residual covariance whose off-diagonal measures the
qubits-vs-error trade-off conditional on time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .dataset import Dataset, design_matrices
from .errors import DomainError, InstabilityError, SingularDesignError

__all__ = [
    "MultivariateFit",
    "CovarianceEstimate",
    "Ellipse",
    "fit_multivariate",
    "bootstrap_covariance",
    "conditional_ellipse",
    "FrontierRegression",
]

_MIN_YEAR_SPREAD = 1e-9


@dataclass(frozen=True)
class MultivariateFit:
    """Drift matrix B (rows intercept/slope, columns log qubits/log error)
    and residual covariance Sigma, reported in the calendar-year frame."""

    B: np.ndarray
    Sigma: np.ndarray
    n: int
    time_offset: float

    def predict(self, year: float) -> np.ndarray:
        """Median (log qubits, log error) at a fractional year."""
        return np.array([1.0, year]) @ self.B


def _validate_design(X: np.ndarray, Y: np.ndarray) -> None:
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.ndim != 2 or X.shape[1] != 2 or Y.shape != (X.shape[0], 2):
        raise SingularDesignError(
            f"expected X (n, 2) and Y (n, 2), got {X.shape} and {Y.shape}"
        )
    if X.shape[0] < 3:
        raise SingularDesignError(f"need n >= 3 rows, got {X.shape[0]}")
    if np.ptp(X[:, 1]) < _MIN_YEAR_SPREAD:
        raise SingularDesignError("year column is constant; design is singular")


def fit_multivariate(X: np.ndarray, Y: np.ndarray) -> MultivariateFit:
    """Closed-form estimators B = (X'X)^-1 X'Y and Sigma = R'R/(n-2).

    The year column is centered at its mean before solving the normal
    equations (raw calendar years make X'X ill-conditioned) and the
    estimate is back-transformed exactly to the calendar frame.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    _validate_design(X, Y)
    n = X.shape[0]
    offset = X[:, 1].mean()
    Xc = np.column_stack([X[:, 0], X[:, 1] - offset])
    B_c, *_ = np.linalg.lstsq(Xc, Y, rcond=None)
    resid = Y - Xc @ B_c
    Sigma = resid.T @ resid / (n - 2)
    # Uncenter: intercept_raw = intercept_centered - slope * offset.
    B = np.vstack([B_c[0] - offset * B_c[1], B_c[1]])
    return MultivariateFit(B=B, Sigma=Sigma, n=n, time_offset=offset)


@dataclass(frozen=True)
class CovarianceEstimate:
    """Bootstrap summary of the residual covariance off-diagonal."""

    point: float
    ci_low: float
    ci_high: float
    prob_positive: float
    resamples: int
    seed: int
    quantiles: tuple[float, float]
    redraws: int


def _resample_rng(seed: int, index: int) -> np.random.Generator:
    # Per-resample stream keyed on (seed, index): results do not depend on
    # execution order, so resamples may run concurrently.
    return np.random.default_rng(np.random.SeedSequence(entropy=(seed, index)))


def bootstrap_covariance(
    dataset: Dataset,
    resamples: int = 1000,
    seed: int = 0,
    quantiles: tuple[float, float] = (0.05, 0.95),
) -> CovarianceEstimate:
    """Naive bootstrap of the metric covariance conditional on date.

    Resamples records with replacement, refits, and takes quantiles of the
    off-diagonal of Sigma.  Degenerate resamples (all dates equal) are
    redrawn from the same per-index stream and counted.
    """
    if resamples < 100:
        raise InstabilityError(f"need at least 100 resamples, got {resamples}")
    X, Y = design_matrices(dataset)
    n = X.shape[0]
    point = fit_multivariate(X, Y).Sigma[0, 1]
    values = np.empty(resamples)
    redraws = 0
    for i in range(resamples):
        rng = _resample_rng(seed, i)
        for _ in range(resamples):
            idx = rng.integers(0, n, size=n)
            try:
                values[i] = fit_multivariate(X[idx], Y[idx]).Sigma[0, 1]
                break
            except SingularDesignError:
                redraws += 1
        else:
            raise InstabilityError("could not draw a non-degenerate resample")
    if redraws > resamples / 2:
        raise InstabilityError(
            f"{redraws} degenerate resamples out of {resamples}; "
            "the dataset is too unstable to bootstrap"
        )
    lo, hi = quantiles
    return CovarianceEstimate(
        point=float(point),
        ci_low=float(np.quantile(values, lo)),
        ci_high=float(np.quantile(values, hi)),
        prob_positive=float(np.mean(values > 0.0)),
        resamples=resamples,
        seed=seed,
        quantiles=(lo, hi),
        redraws=redraws,
    )


@dataclass(frozen=True)
class Ellipse:
    """Level set of a bivariate Gaussian: center, semi-axes, rotation."""

    center: tuple[float, float]
    semi_axes: tuple[float, float]
    angle: float  # radians, orientation of the major axis

    def boundary(self, n_points: int = 128) -> np.ndarray:
        theta = np.linspace(0.0, 2.0 * math.pi, n_points)
        a, b = self.semi_axes
        x = a * np.cos(theta)
        y = b * np.sin(theta)
        c, s = math.cos(self.angle), math.sin(self.angle)
        return np.column_stack(
            [self.center[0] + c * x - s * y, self.center[1] + s * x + c * y]
        )


def conditional_ellipse(fit: MultivariateFit, year: float, level: float) -> Ellipse:
    """Probability-`level` region of the metric distribution at a year.

    The squared radius along Sigma's eigenbasis is the chi-square quantile
    with 2 degrees of freedom, -2*ln(1 - level) in closed form.
    """
    if not 0.0 < level < 1.0:
        raise DomainError(f"coverage level must lie in (0, 1), got {level}")
    Sigma = np.asarray(fit.Sigma, dtype=float)
    eigvals, eigvecs = np.linalg.eigh(Sigma)
    if eigvals.min() < -1e-12 * max(1.0, eigvals.max()):
        raise DomainError("residual covariance is not positive semidefinite")
    eigvals = np.clip(eigvals, 0.0, None)
    r2 = -2.0 * math.log(1.0 - level)
    # eigh returns ascending eigenvalues; put the major axis first.
    major, minor = eigvals[1], eigvals[0]
    vec = eigvecs[:, 1]
    center = fit.predict(year)
    return Ellipse(
        center=(float(center[0]), float(center[1])),
        semi_axes=(math.sqrt(r2 * major), math.sqrt(r2 * minor)),
        angle=math.atan2(vec[1], vec[0]),
    )


class FrontierRegression(BaseEstimator):
    """Estimator wrapper around the multivariate log-linear frontier fit.

    fit(X, Y) takes the design matrix (intercept, fractional year) and the
    log-metric matrix; predict(years) returns the median log metrics.
    """

    def fit(self, X, Y):
        fit = fit_multivariate(X, Y)
        self.B_ = fit.B
        self.Sigma_ = fit.Sigma
        self.n_ = fit.n
        self.fit_ = fit
        return self

    def _check_fitted(self):
        if not hasattr(self, "fit_"):
            raise NotFittedError("FrontierRegression is not fitted yet")

    def predict(self, years):
        self._check_fitted()
        years = np.atleast_1d(np.asarray(years, dtype=float))
        X = np.column_stack([np.ones_like(years), years])
        return X @ self.B_

    def conditional_ellipse(self, year, level):
        self._check_fitted()
        return conditional_ellipse(self.fit_, year, level)

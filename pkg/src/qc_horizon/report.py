"""Structured, diff-able report document for analysis runs.

Reports are schema-versioned JSON with deterministic key ordering;
identical inputs produce byte-identical documents.
"""

from __future__ import annotations

import json
import math
from typing import Any, Optional

from . import __version__
from .backtest import ValidationResult
from .dataset import Dataset
from .frontier import CovarianceEstimate, MultivariateFit
from .glq import QecParams
from .trends import MilestoneForecast, UnivariateFit

SCHEMA_VERSION = "qc-horizon-report/1"

__all__ = ["SCHEMA_VERSION", "build_report", "render_report"]


def _num(x: Optional[float]) -> Any:
    """Full-precision value paired with a rounded display form."""
    if x is None:
        return None
    if isinstance(x, float) and math.isinf(x):
        return {"value": "inf", "display": "not reached"}
    return {"value": float(x), "display": f"{float(x):.4g}"}


def _fit_summary(fit: UnivariateFit) -> dict:
    return {
        "intercept": _num(fit.intercept),
        "slope": _num(fit.slope),
        "sigma2": _num(fit.sigma2),
        "n_records": fit.n_records,
    }


def _dataset_section(dataset: Dataset, qec: QecParams) -> dict:
    counts = dataset.view_counts(qec)
    return {
        "digest": dataset.provenance.source_digest if dataset.provenance else None,
        "source": dataset.provenance.source_name if dataset.provenance else None,
        "counts": counts,
    }


def frontier_section(fit: MultivariateFit,
                     covariance: Optional[CovarianceEstimate] = None) -> dict:
    section = {
        "n": fit.n,
        "B": {
            "intercept_log_qubits": _num(fit.B[0, 0]),
            "intercept_log_error": _num(fit.B[0, 1]),
            "slope_log_qubits": _num(fit.B[1, 0]),
            "slope_log_error": _num(fit.B[1, 1]),
        },
        "Sigma": {
            "var_log_qubits": _num(fit.Sigma[0, 0]),
            "var_log_error": _num(fit.Sigma[1, 1]),
            "covariance": _num(fit.Sigma[0, 1]),
        },
    }
    if covariance is not None:
        section["covariance_bootstrap"] = {
            "point": _num(covariance.point),
            "ci_low": _num(covariance.ci_low),
            "ci_high": _num(covariance.ci_high),
            "prob_positive": _num(covariance.prob_positive),
            "resamples": covariance.resamples,
            "seed": covariance.seed,
            "quantile_levels": list(covariance.quantiles),
            "redraws": covariance.redraws,
        }
    return section


def forecast_section(forecast: MilestoneForecast) -> dict:
    per_threshold = {}
    for threshold in forecast.thresholds:
        quantiles = forecast.crossing_quantiles[threshold]
        per_threshold[f"{threshold:g}"] = {
            "crossing_quantiles": {
                f"{q:g}": _num(v)
                for q, v in zip(forecast.quantile_levels, quantiles)
            },
            "censored_resamples": forecast.diagnostics["censored"][threshold],
        }
    return {
        "aggregation": forecast.config.aggregation,
        "resamples": forecast.config.resamples,
        "seed": forecast.config.seed,
        "horizon_end": forecast.config.horizon_end,
        "thresholds": per_threshold,
        "diagnostics": {
            "n": forecast.diagnostics["n"],
            "redraws": forecast.diagnostics["redraws"],
            "median_qubit_records": forecast.diagnostics["median_qubit_records"],
            "median_error_records": forecast.diagnostics["median_error_records"],
        },
    }


def validation_section(result: ValidationResult) -> dict:
    cells = []
    for c in result.cells:
        cells.append({
            "train_end": int(c.train_window[1]),
            "target_year": c.target_year,
            "applicable": c.applicable,
            "q_low": _num(c.q_low),
            "q_med": _num(c.q_med),
            "q_high": _num(c.q_high),
            "actual": _num(c.actual),
            "covered": c.covered,
            "n_train": c.n_train,
        })
    return {
        "cells": cells,
        "coverage_rate": _num(result.coverage_rate),
    }


def build_report(
    dataset: Dataset,
    qec: QecParams,
    config: dict,
    sections: dict,
    warnings: Optional[list[str]] = None,
) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "tool_version": __version__,
        "dataset": _dataset_section(dataset, qec),
        "config": config,
        "results": sections,
        "warnings": sorted(warnings or []),
    }


def render_report(document: dict) -> str:
    return json.dumps(document, indent=2, sort_keys=True, allow_nan=False) + "\n"

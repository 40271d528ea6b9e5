"""Rolling validation: train on a prefix window, score later years.

For each (training window, target year) pair the record-based model is
refitted on the prefix and the bootstrap distribution of the predicted
maximum GLQ at the target year is compared against the realized maximum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .dataset import Dataset, FilterSpec
from .errors import InsufficientDataError
from .glq import DEFAULT_QEC, QecParams, generalized_logical_qubits
from .trends import ForecastConfig, bootstrap_trend_fits, glq_trajectory

__all__ = ["ValidationCell", "ValidationResult", "actual_record_glq", "rolling_validate"]

# Fractional year at which a target year's prediction is evaluated: the
# end of that calendar year, matching the cumulative "actual maximum".
_EVAL_POINT = 1.0


def actual_record_glq(
    dataset: Dataset, through_year: int, qec: QecParams = DEFAULT_QEC
) -> float:
    """Cumulative best GLQ over all records dated before the end of the
    given year; records at or above threshold count as 0."""
    best = 0.0
    for r in dataset.records:
        if r.fractional_year >= through_year + 1:
            continue
        if r.gate_error_rate is None:
            continue
        value = generalized_logical_qubits(r.physical_qubits, r.gate_error_rate, qec)
        best = max(best, value.value)
    return best


@dataclass(frozen=True)
class ValidationCell:
    train_window: tuple[float, float]
    target_year: int
    q_low: Optional[float]
    q_med: Optional[float]
    q_high: Optional[float]
    actual: float
    covered: Optional[bool]
    applicable: bool
    n_train: int = 0


@dataclass(frozen=True)
class ValidationResult:
    cells: tuple[ValidationCell, ...]
    coverage_rate: float
    train_ends: tuple[int, ...]
    targets: tuple[int, ...]

    def cell(self, train_end: int, target: int) -> ValidationCell:
        for c in self.cells:
            if c.train_window[1] == train_end and c.target_year == target:
                return c
        raise KeyError((train_end, target))


def rolling_validate(
    dataset: Dataset,
    train_ends: Sequence[int],
    targets: Sequence[int],
    config: ForecastConfig,
) -> ValidationResult:
    """Validation grid over training windows and target years.

    The training view keeps the configured window's start and technology
    criteria but truncates the end at each train_end year.  Cells whose
    target does not lie after the training window are not applicable, as
    are training windows with too few usable records.
    """
    base = config.window or FilterSpec()
    start = base.date_window[0] if base.date_window else -math.inf
    cells: list[ValidationCell] = []
    n_covered = 0
    n_scored = 0
    for train_end in train_ends:
        window = replace(
            base, date_window=(start, train_end + 1.0 - 1e-9) if start > -math.inf
            else (-1e9, train_end + 1.0 - 1e-9)
        )
        cfg = replace(config, window=window)
        try:
            fits, diagnostics = bootstrap_trend_fits(dataset, cfg)
        except InsufficientDataError:
            fits, diagnostics = None, {"n": 0}
        for target in targets:
            actual = actual_record_glq(dataset, target, config.qec)
            if target <= train_end or fits is None:
                cells.append(
                    ValidationCell(
                        train_window=(start, float(train_end)),
                        target_year=target,
                        q_low=None, q_med=None, q_high=None,
                        actual=actual, covered=None, applicable=False,
                        n_train=diagnostics["n"],
                    )
                )
                continue
            t_eval = target + _EVAL_POINT
            values = np.array(
                [float(glq_trajectory(fq, fe, config.qec, t_eval)) for fq, fe in fits]
            )
            q_low, q_med, q_high = np.quantile(
                values, [config.quantiles[0],
                         config.quantiles[len(config.quantiles) // 2],
                         config.quantiles[-1]]
            )
            covered = bool(q_low <= actual <= q_high)
            n_covered += covered
            n_scored += 1
            cells.append(
                ValidationCell(
                    train_window=(start, float(train_end)),
                    target_year=target,
                    q_low=float(q_low), q_med=float(q_med), q_high=float(q_high),
                    actual=actual, covered=covered, applicable=True,
                    n_train=diagnostics["n"],
                )
            )
    coverage = n_covered / n_scored if n_scored else math.nan
    return ValidationResult(
        cells=tuple(cells),
        coverage_rate=coverage,
        train_ends=tuple(train_ends),
        targets=tuple(targets),
    )

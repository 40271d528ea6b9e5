"""Generalized-logical-qubit (GLQ) figure of merit.

The GLQ index combines the raw physical qubit count of a device with its
two-qubit gate error rate, via the physical-per-logical overhead of the
surface code.  It extends smoothly below one logical qubit, which is what
makes it usable for scoring current-generation hardware.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DivergenceError, DomainError

__all__ = [
    "QecParams",
    "GlqValue",
    "qec_overhead",
    "generalized_logical_qubits",
    "continuous_code_distance",
    "glq_threshold_curve",
    "DEFAULT_QEC",
]


@dataclass(frozen=True)
class QecParams:
    """Error-correction constants defining the GLQ map.

    p_th is the fault-tolerance threshold error rate of the assumed code,
    p_L the target logical error rate of the emulated computation.
    """

    p_th: float = 1e-2
    p_L: float = 1e-18
    scheme_tag: str = "surface-code"

    def __post_init__(self):
        if not (0.0 < self.p_L < self.p_th < 1.0):
            raise DomainError(
                f"require 0 < p_L < p_th < 1, got p_L={self.p_L}, p_th={self.p_th}"
            )


DEFAULT_QEC = QecParams()


@dataclass(frozen=True)
class GlqValue:
    """GLQ count plus a flag telling whether the metric is defined.

    Above the threshold error rate the index is conventionally 0 with
    defined=False, so that forecast trajectories stay total functions.
    """

    value: float
    defined: bool

    def __post_init__(self):
        if not self.defined and self.value != 0.0:
            raise ValueError("undefined GLQ must carry value 0")


def _check_error_rate(p_P: float, params: QecParams) -> None:
    if not (0.0 < p_P < 1.0):
        raise DomainError(f"error rate must lie in (0, 1), got {p_P}")
    if p_P <= params.p_L / math.sqrt(10.0):
        raise DomainError(
            f"error rate {p_P} is at or below p_L/sqrt(10); "
            "outside the validity regime of the overhead formula"
        )


def qec_overhead(p_P: float, params: QecParams = DEFAULT_QEC) -> float:
    """Fraction of a logical qubit supported per physical qubit.

    Computes [4*log(sqrt(10)*p_P/p_L)/log(p_th/p_P) + 1]**-2 for error
    rates below threshold and 0 at or above it.  The ratio of logs is
    base-free; natural logs are used.
    """
    _check_error_rate(p_P, params)
    if p_P >= params.p_th:
        return 0.0
    num = math.log(math.sqrt(10.0) * p_P / params.p_L)
    den = math.log(params.p_th / p_P)
    return (4.0 * num / den + 1.0) ** -2


def generalized_logical_qubits(
    N_P: float, p_P: float, params: QecParams = DEFAULT_QEC
) -> GlqValue:
    """GLQ count N_P * qec_overhead(p_P); undefined (0) at or above threshold."""
    if N_P < 0:
        raise DomainError(f"physical qubit count must be >= 0, got {N_P}")
    f = qec_overhead(p_P, params)
    if p_P >= params.p_th:
        return GlqValue(0.0, defined=False)
    return GlqValue(N_P * f, defined=True)


def continuous_code_distance(p_P: float, params: QecParams = DEFAULT_QEC) -> float:
    """Real-valued code distance achieving the target logical error rate.

    Solves p_L = sqrt(10)*p_P*(p_P/p_th)**((d-1)/2) for d, ignoring the
    odd-integer discreteness of real codes.  Satisfies
    (2d - 1)**-2 == qec_overhead(p_P) identically.
    """
    _check_error_rate(p_P, params)
    if p_P >= params.p_th:
        raise DivergenceError(
            f"code distance diverges for error rate {p_P} >= threshold {params.p_th}"
        )
    num = math.log(math.sqrt(10.0) * p_P / params.p_L)
    den = math.log(params.p_th / p_P)
    return 2.0 * num / den + 1.0


def glq_threshold_curve(
    target: float,
    params: QecParams = DEFAULT_QEC,
    error_grid=(),
) -> list[tuple[float, float]]:
    """Contour GLQ == target as (error rate, required physical qubits) pairs."""
    if target <= 0:
        raise DomainError(f"contour target must be positive, got {target}")
    curve = []
    for p in error_grid:
        f = qec_overhead(p, params)
        if f == 0.0:
            raise DomainError(
                f"grid point {p} is at or above threshold; contour diverges there"
            )
        curve.append((p, target / f))
    return curve

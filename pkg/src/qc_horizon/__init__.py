"""Quantum computing hardware trend analysis and milestone forecasting."""

__version__ = "0.1.0"

from .dataset import (  # noqa: E402
    Dataset,
    FilterSpec,
    SystemRecord,
    apply_filter,
    design_matrices,
    impute_fractional_year,
    load_bundled_dataset,
    parse_dataset,
    serialize_dataset,
)
from .glq import (  # noqa: E402
    GlqValue,
    QecParams,
    continuous_code_distance,
    generalized_logical_qubits,
    glq_threshold_curve,
    qec_overhead,
)
from .frontier import (  # noqa: E402
    FrontierRegression,
    bootstrap_covariance,
    conditional_ellipse,
    fit_multivariate,
)
from .trends import (  # noqa: E402
    ForecastConfig,
    MilestoneForecast,
    RecordTrendForecaster,
    bootstrap_forecast,
    crossing_time,
    extract_records,
    fit_loglinear,
    gaussian_noise_band,
    simple_glq_fit,
)
from .backtest import actual_record_glq, rolling_validate  # noqa: E402

__all__ = [
    "Dataset",
    "FilterSpec",
    "SystemRecord",
    "apply_filter",
    "design_matrices",
    "impute_fractional_year",
    "load_bundled_dataset",
    "parse_dataset",
    "serialize_dataset",
    "GlqValue",
    "QecParams",
    "continuous_code_distance",
    "generalized_logical_qubits",
    "glq_threshold_curve",
    "qec_overhead",
    "FrontierRegression",
    "bootstrap_covariance",
    "conditional_ellipse",
    "fit_multivariate",
    "ForecastConfig",
    "MilestoneForecast",
    "RecordTrendForecaster",
    "bootstrap_forecast",
    "crossing_time",
    "extract_records",
    "fit_loglinear",
    "gaussian_noise_band",
    "simple_glq_fit",
    "actual_record_glq",
    "rolling_validate",
]

"""Time-dependent SIR tracking and forecasting with ridge-fitted FIR filters."""

__version__ = "0.1.0"

from .epidemic import (
    EpidemicSeries,
    FractionSeries,
    RateSeries,
    extract_rates,
    extract_rates_chen,
    merge_compartments,
    simulate,
    step_counts_chen,
    step_fractions,
    to_fractions,
)
from .evaluation import compare_methods, err_w, grid_sweep
from .fir import (
    FIRRateForecaster,
    FirConfig,
    ForecastTrace,
    TimeDependentSIR,
    forecast_counts,
    forecast_rolling,
    forecast_static,
)
from .linalg import RidgeSVD, least_squares, ridge_solve, svd

__all__ = [
    "EpidemicSeries",
    "FIRRateForecaster",
    "FirConfig",
    "ForecastTrace",
    "FractionSeries",
    "RateSeries",
    "RidgeSVD",
    "TimeDependentSIR",
    "compare_methods",
    "err_w",
    "extract_rates",
    "extract_rates_chen",
    "forecast_counts",
    "forecast_rolling",
    "forecast_static",
    "grid_sweep",
    "least_squares",
    "merge_compartments",
    "ridge_solve",
    "simulate",
    "step_counts_chen",
    "step_fractions",
    "svd",
    "to_fractions",
]

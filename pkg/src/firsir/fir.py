"""FIR filters on rate histories and the two window forecasters.

A filter of order ``J`` predicts a rate from its ``J`` previous values plus
an intercept::

    beta_hat(t) = a0 + a1 * beta(t-1) + ... + aJ * beta(t-J)

Coefficients are ridge-fitted on the known history. :func:`forecast_static`
keeps the first fit for the whole window; :func:`forecast_rolling` appends
each estimate to the history and refits before the next one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .epidemic import (
    EpidemicSeries,
    RateSeries,
    extract_rates,
    extract_rates_chen,
    step_counts_chen,
    step_fractions,
    to_fractions,
)
from .exceptions import InvalidInputError, NonConvergenceError
from .linalg import ridge_solve


def resolve_order(order, T):
    """``"auto"`` becomes ``round(T / 4)`` with halves rounded away from zero."""
    if order == "auto":
        return int(math.floor(T / 4 + 0.5))
    if isinstance(order, bool) or int(order) != order:
        raise InvalidInputError(f"filter order must be an integer or 'auto', got {order!r}")
    return int(order)


@dataclass(frozen=True)
class FirConfig:
    """Filter orders ``J``, ``K``, regularisation ``alpha1``, ``alpha2``,
    known horizon ``T`` (days) and prediction window ``W`` (days)."""

    J: int
    K: int
    alpha1: float
    alpha2: float
    T: int
    W: int

    def __post_init__(self):
        T = int(self.T)
        object.__setattr__(self, "J", resolve_order(self.J, T))
        object.__setattr__(self, "K", resolve_order(self.K, T))
        for name in ("J", "K"):
            value = getattr(self, name)
            if not 0 < value < T - 2:
                raise InvalidInputError(f"{name}={value} must satisfy 0 < {name} < T-2 = {T - 2}")
        for name in ("alpha1", "alpha2"):
            if not getattr(self, name) > 0:
                raise InvalidInputError(f"{name} must be positive, got {getattr(self, name)!r}")
        if int(self.W) < 1:
            raise InvalidInputError(f"W must be at least 1, got {self.W}")
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "W", int(self.W))


@dataclass(frozen=True)
class FirFit:
    coefficients: np.ndarray
    order: int
    lam: float

    def __post_init__(self):
        if len(self.coefficients) != self.order + 1:
            raise InvalidInputError(
                f"filter of order {self.order} needs {self.order + 1} coefficients, "
                f"got {len(self.coefficients)}"
            )


@dataclass(frozen=True)
class ForecastTrace:
    """Estimated rates for days ``T-1 .. T+W-2`` and states for ``T .. T+W-1``.

    ``units`` is ``"fraction"`` for the per-capita pipeline and ``"count"``
    for the count-based one. ``beta_fits``/``gamma_fits`` hold one fit for a
    static forecast and one per step for a rolling one.
    """

    beta_hat: np.ndarray
    gamma_hat: np.ndarray
    i_hat: np.ndarray
    r_hat: np.ndarray
    warnings: tuple = ()
    units: str = "fraction"
    beta_fits: tuple = field(default=(), repr=False)
    gamma_fits: tuple = field(default=(), repr=False)


def build_design(rates, order):
    """Target vector and design matrix for fitting an order-``order`` filter.

    Row ``m`` (0-based) is ``(1, x[order+m-1], ..., x[m])`` and its target
    is ``x[order+m]``.
    """
    x = np.asarray(rates, dtype=np.float64)
    order = int(order)
    if order < 1 or x.size <= order + 1:
        raise InvalidInputError(
            f"order {order} out of range for {x.size} rate observations "
            f"(need 0 < order < {x.size - 1})"
        )
    rows = x.size - order
    y = x[order:].copy()
    X = np.ones((rows, order + 1))
    for col in range(1, order + 1):
        X[:, col] = x[order - col : order - col + rows]
    return y, X


def fit_filter(rates, order, lam) -> FirFit:
    y, X = build_design(rates, order)
    return FirFit(ridge_solve(X, y, lam).coefficients, int(order), float(lam))


def make_lag_vector(history, order):
    """``(1, h[-1], h[-2], ..., h[-order])``: newest value right after the intercept."""
    h = np.asarray(history, dtype=np.float64)
    if h.size < order:
        raise InvalidInputError(f"history of length {h.size} is shorter than order {order}")
    lag = np.empty(order + 1)
    lag[0] = 1.0
    lag[1:] = h[::-1][:order]
    return lag


def fir_eval(fit: FirFit, lag):
    lag = np.asarray(lag, dtype=np.float64)
    if lag.shape != (fit.order + 1,):
        raise InvalidInputError(f"lag vector must have length {fit.order + 1}, got {lag.size}")
    return float(fit.coefficients @ lag)


def forecast_rate(rates, order, lam, steps, refit):
    """Forecast ``steps`` future values of one rate series.

    Returns the estimates and the fits used (one, or one per step when
    ``refit``). Estimates are appended to the history as they are produced.
    """
    history = list(np.asarray(rates, dtype=np.float64))
    fits = []
    estimates = np.empty(steps)
    fit = None
    for j in range(steps):
        if fit is None or refit:
            try:
                fit = fit_filter(history, order, lam)
            except NonConvergenceError as exc:
                raise NonConvergenceError(exc.sweeps, step=j) from exc
            fits.append(fit)
        estimates[j] = fir_eval(fit, make_lag_vector(history, order))
        history.append(estimates[j])
    return estimates, tuple(fits)


def _forecast(rates: RateSeries, state, cfg: FirConfig, refit, step, units):
    if len(rates) != cfg.T - 1:
        raise InvalidInputError(f"expected {cfg.T - 1} rate observations for T={cfg.T}, got {len(rates)}")
    beta_hat, beta_fits = forecast_rate(rates.beta, cfg.J, cfg.alpha1, cfg.W, refit)
    gamma_hat, gamma_fits = forecast_rate(rates.gamma, cfg.K, cfg.alpha2, cfg.W, refit)
    i_hat = np.empty(cfg.W)
    r_hat = np.empty(cfg.W)
    warnings = []
    i_t, r_t = state
    for j in range(cfg.W):
        i_t, r_t, flagged = step(i_t, r_t, beta_hat[j], gamma_hat[j])
        i_hat[j], r_hat[j] = i_t, r_t
        if flagged:
            warnings.append(f"state out of range at t=T+{j}: ({i_t:.6g}, {r_t:.6g})")
    return ForecastTrace(
        beta_hat=beta_hat,
        gamma_hat=gamma_hat,
        i_hat=i_hat,
        r_hat=r_hat,
        warnings=tuple(warnings),
        units=units,
        beta_fits=beta_fits,
        gamma_fits=gamma_fits,
    )


def _units_for(step):
    return "count" if step is step_counts_chen else "fraction"


def forecast_static(rates: RateSeries, state, cfg: FirConfig, step=step_fractions) -> ForecastTrace:
    """Fit both filters once and roll them over the window.

    ``state`` is the last known ``(i, r)`` (or ``(I, R)`` with
    ``step=step_counts_chen``).
    """
    return _forecast(rates, state, cfg, refit=False, step=step, units=_units_for(step))


def forecast_rolling(rates: RateSeries, state, cfg: FirConfig, step=step_fractions) -> ForecastTrace:
    """As :func:`forecast_static`, refitting on the extended history at every step."""
    return _forecast(rates, state, cfg, refit=True, step=step, units=_units_for(step))


def forecast_counts(trace: ForecastTrace, n):
    """Scale a fraction trace to counts; count traces are returned unchanged."""
    if not n > 0:
        raise InvalidInputError(f"population must be positive, got {n!r}")
    if trace.units == "count":
        return trace.i_hat.copy(), trace.r_hat.copy()
    return n * trace.i_hat, n * trace.r_hat


class FIRRateForecaster(BaseEstimator):
    """Ridge-fitted FIR predictor for a single rate series.

    Parameters
    ----------
    order : int, default=3
        Number of lagged values feeding the filter.
    alpha : float, default=1e-3
        Ridge regularisation.
    refit : bool, default=False
        Refit on the extended history after every forecast step.
    """

    def __init__(self, order=3, alpha=1e-3, refit=False):
        self.order = order
        self.alpha = alpha
        self.refit = refit

    def fit(self, y, X=None):
        y = np.asarray(y, dtype=np.float64)
        if y.ndim != 1 or not np.all(np.isfinite(y)):
            raise InvalidInputError("rate history must be a finite 1-D array")
        if not self.alpha > 0:
            raise InvalidInputError(f"alpha must be positive, got {self.alpha!r}")
        fit = fit_filter(y, self.order, self.alpha)
        self.history_ = y.copy()
        self.coef_ = fit.coefficients
        return self

    def predict(self, steps=1):
        check_is_fitted(self, "coef_")
        estimates, _ = forecast_rate(self.history_, self.order, self.alpha, int(steps), self.refit)
        return estimates


class TimeDependentSIR(BaseEstimator):
    """Window forecaster for infected/removed counts.

    ``variant="fraction"`` measures rates on per-capita fractions and steps
    the full recursion; ``variant="count"`` uses raw counts with ``S ~ n``.
    ``refit=True`` selects the rolling refit. The defaults are the rolling
    per-capita configuration; :meth:`original` builds the static count
    configuration with ``J = K = 3``.

    Parameters
    ----------
    order_beta, order_gamma : int or "auto", default="auto"
    alpha_beta, alpha_gamma : float
    refit : bool, default=True
    variant : {"fraction", "count"}, default="fraction"
    """

    def __init__(
        self,
        order_beta="auto",
        order_gamma="auto",
        alpha_beta=1e-3,
        alpha_gamma=1e-4,
        refit=True,
        variant="fraction",
    ):
        self.order_beta = order_beta
        self.order_gamma = order_gamma
        self.alpha_beta = alpha_beta
        self.alpha_gamma = alpha_gamma
        self.refit = refit
        self.variant = variant

    @classmethod
    def original(cls):
        return cls(order_beta=3, order_gamma=3, alpha_beta=0.03, alpha_gamma=1e-6, refit=False, variant="count")

    @classmethod
    def modified(cls):
        return cls(order_beta=11, order_gamma=11, alpha_beta=1e-3, alpha_gamma=1e-4, refit=True, variant="fraction")

    def config(self, T, W):
        return FirConfig(self.order_beta, self.order_gamma, self.alpha_beta, self.alpha_gamma, T, W)

    def fit(self, series: EpidemicSeries, y=None):
        if not isinstance(series, EpidemicSeries):
            raise InvalidInputError("fit expects an EpidemicSeries")
        if self.variant == "fraction":
            fr = to_fractions(series)
            self.rates_ = extract_rates(fr)
            self.state_ = (float(fr.i[-1]), float(fr.r[-1]))
        elif self.variant == "count":
            self.rates_ = extract_rates_chen(series)
            self.state_ = (float(series.infected[-1]), float(series.removed[-1]))
        else:
            raise InvalidInputError(f"unknown variant {self.variant!r}")
        self.T_ = len(series)
        self.population_ = series.population
        # Validates orders against T early.
        self.config(self.T_, 1)
        return self

    def forecast(self, W) -> ForecastTrace:
        check_is_fitted(self, "rates_")
        cfg = self.config(self.T_, W)
        step = step_fractions if self.variant == "fraction" else step_counts_chen
        run = forecast_rolling if self.refit else forecast_static
        return run(self.rates_, self.state_, cfg, step=step)

    def predict(self, W=7):
        """Predicted ``(I, R)`` counts for days ``T .. T+W-1``, shape ``(W, 2)``."""
        I_hat, R_hat = forecast_counts(self.forecast(W), self.population_)
        return np.column_stack([I_hat, R_hat])


__all__ = [
    "FirConfig",
    "FirFit",
    "ForecastTrace",
    "FIRRateForecaster",
    "TimeDependentSIR",
    "build_design",
    "fir_eval",
    "fit_filter",
    "forecast_counts",
    "forecast_rate",
    "forecast_rolling",
    "forecast_static",
    "make_lag_vector",
    "resolve_order",
]

"""Discrete time-dependent SIR model.

States are carried as fractions of a constant population ``n``::

    i(t+1) = [1 + beta(t) * (1 - i(t) - r(t)) - gamma(t)] * i(t)
    r(t+1) = r(t) + gamma(t) * i(t)

Rates can be read back exactly from consecutive observations, which is what
:func:`extract_rates` does. The ``*_chen`` variants use raw counts and the
approximation ``S(t) ~ n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .exceptions import DepletedSusceptibleError, InvalidInputError, ZeroInfectedError

# Guard for the denominator 1 - i - r.
EPS_DEN = 1e-12


def _frozen_array(values, name):
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidInputError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class EpidemicSeries:
    """Daily infected and removed counts for a population of constant size.

    ``removed`` is recovered plus deaths. Counts are stored as floats.
    """

    infected: np.ndarray
    removed: np.ndarray
    population: float

    def __post_init__(self):
        infected = _frozen_array(self.infected, "infected")
        removed = _frozen_array(self.removed, "removed")
        if infected.shape != removed.shape:
            raise InvalidInputError(
                f"infected and removed differ in length ({infected.size} vs {removed.size})"
            )
        if infected.size < 1:
            raise InvalidInputError("series is empty")
        population = float(self.population)
        if not np.isfinite(population) or population <= 0:
            raise InvalidInputError(f"population must be positive, got {self.population!r}")
        total = infected + removed
        if np.any(total < 0) or np.any(total > population):
            bad = int(np.flatnonzero((total < 0) | (total > population))[0])
            raise InvalidInputError(f"I + R outside [0, n] at t={bad}")
        object.__setattr__(self, "infected", infected)
        object.__setattr__(self, "removed", removed)
        object.__setattr__(self, "population", population)

    def __len__(self):
        return self.infected.size

    def __getitem__(self, index):
        if not isinstance(index, slice):
            raise TypeError("EpidemicSeries only supports slicing")
        return EpidemicSeries(self.infected[index], self.removed[index], self.population)


@dataclass(frozen=True)
class FractionSeries:
    """Per-capita infected and removed fractions ``i(t)``, ``r(t)``."""

    i: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        i = _frozen_array(self.i, "i")
        r = _frozen_array(self.r, "r")
        if i.shape != r.shape:
            raise InvalidInputError(f"i and r differ in length ({i.size} vs {r.size})")
        if np.any(i + r < 0) or np.any(i + r > 1.0):
            raise InvalidInputError("fractions must satisfy 0 <= i + r <= 1")
        object.__setattr__(self, "i", i)
        object.__setattr__(self, "r", r)

    def __len__(self):
        return self.i.size

    @property
    def s(self):
        return 1.0 - self.i - self.r


@dataclass(frozen=True)
class RateSeries:
    """Transmission and recovery rates, one entry per day transition.

    ``warnings`` lists indices with negative rates (typically downward
    revisions in cumulative data); such values are kept as measured.
    """

    beta: np.ndarray
    gamma: np.ndarray
    warnings: tuple = field(default=(), compare=False)

    def __post_init__(self):
        beta = _frozen_array(self.beta, "beta")
        gamma = _frozen_array(self.gamma, "gamma")
        if beta.shape != gamma.shape:
            raise InvalidInputError(f"beta and gamma differ in length ({beta.size} vs {gamma.size})")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "warnings", tuple(self.warnings))

    def __len__(self):
        return self.beta.size


class Step(NamedTuple):
    """Result of one recursion step; ``flagged`` marks an out-of-range state."""

    i: float
    r: float
    flagged: bool


def _negative_rate_warnings(beta, gamma):
    out = []
    for t in np.flatnonzero(beta < 0):
        out.append(f"negative beta at t={int(t)}: {beta[t]:.6g}")
    for t in np.flatnonzero(gamma < 0):
        out.append(f"negative gamma at t={int(t)}: {gamma[t]:.6g}")
    return tuple(out)


def to_fractions(series: EpidemicSeries) -> FractionSeries:
    n = series.population
    return FractionSeries(series.infected / n, series.removed / n)


def extract_rates(fr: FractionSeries) -> RateSeries:
    """Measure ``beta(t)``, ``gamma(t)`` for ``0 <= t <= T-2`` from fractions."""
    if len(fr) < 2:
        raise InvalidInputError("need at least two days to extract rates")
    i, r = fr.i, fr.r
    i_now, r_now = i[:-1], r[:-1]
    nonpositive = np.flatnonzero(i_now <= 0)
    if nonpositive.size:
        raise ZeroInfectedError(int(nonpositive[0]))
    susceptible = 1.0 - i_now - r_now
    depleted = np.flatnonzero(susceptible <= EPS_DEN)
    if depleted.size:
        raise DepletedSusceptibleError(int(depleted[0]))
    dr = np.diff(r)
    gamma = dr / i_now
    beta = (np.diff(i) + dr) / (i_now * susceptible)
    return RateSeries(beta, gamma, _negative_rate_warnings(beta, gamma))


def extract_rates_chen(series: EpidemicSeries) -> RateSeries:
    """Count-based rates under ``S(t) = n``; the population plays no role."""
    if len(series) < 2:
        raise InvalidInputError("need at least two days to extract rates")
    infected, removed = series.infected, series.removed
    now = infected[:-1]
    nonpositive = np.flatnonzero(now <= 0)
    if nonpositive.size:
        raise ZeroInfectedError(int(nonpositive[0]))
    dr = np.diff(removed)
    gamma = dr / now
    beta = (np.diff(infected) + dr) / now
    return RateSeries(beta, gamma, _negative_rate_warnings(beta, gamma))


def step_fractions(i_t, r_t, beta_t, gamma_t) -> Step:
    """Advance fractions one day. Out-of-range results are flagged, never clamped."""
    i_next = (1.0 + beta_t * (1.0 - i_t - r_t) - gamma_t) * i_t
    r_next = r_t + gamma_t * i_t
    flagged = bool(i_next < 0 or r_next < 0 or i_next + r_next > 1.0)
    return Step(float(i_next), float(r_next), flagged)


def step_counts_chen(I_t, R_t, beta_hat, gamma_hat) -> Step:
    """Advance counts one day under ``S(t) = n``."""
    I_next = (1.0 + beta_hat - gamma_hat) * I_t
    R_next = R_t + gamma_hat * I_t
    return Step(float(I_next), float(R_next), bool(I_next < 0 or R_next < 0))


def merge_compartments(r, d):
    """Fold a separate deaths compartment into the removed one: ``r + d``."""
    r = np.asarray(r, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    if r.shape != d.shape:
        raise InvalidInputError(f"length mismatch: r has {r.size}, d has {d.size}")
    return r + d


def simulate(i0, r0, rates: RateSeries) -> FractionSeries:
    """Iterate :func:`step_fractions` from ``(i0, r0)`` over ``rates``."""
    steps = len(rates)
    i = np.empty(steps + 1)
    r = np.empty(steps + 1)
    i[0], r[0] = i0, r0
    for t in range(steps):
        i[t + 1], r[t + 1], _ = step_fractions(i[t], r[t], rates.beta[t], rates.gamma[t])
    # The recursion may leave [0, 1] for rates that did not come from data.
    return _unchecked_fractions(i, r)


def _unchecked_fractions(i, r):
    fr = object.__new__(FractionSeries)
    i = np.array(i, dtype=np.float64)
    r = np.array(r, dtype=np.float64)
    i.setflags(write=False)
    r.setflags(write=False)
    object.__setattr__(fr, "i", i)
    object.__setattr__(fr, "r", r)
    return fr

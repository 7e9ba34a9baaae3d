import datetime as dt

import numpy as np
import pytest

from firsir.epidemic import EpidemicSeries, FractionSeries, RateSeries, simulate

START = dt.date(2020, 5, 1)
DAYS = 245  # 2020-05-01 .. 2020-12-31
POPULATION = 10_000_000


def synthetic_rates(days, seed=0):
    """Slowly drifting beta/gamma with mild day-to-day noise."""
    rng = np.random.default_rng(seed)
    t = np.arange(days - 1)
    beta = 0.12 + 0.03 * np.sin(2 * np.pi * t / 90) + 0.002 * rng.standard_normal(t.size)
    gamma = 0.08 + 0.01 * np.cos(2 * np.pi * t / 120) + 0.001 * rng.standard_normal(t.size)
    return RateSeries(beta, gamma)


def admissible_fractions(rng, length):
    """Random fraction series with i > 0 and i + r < 1 generated by the recursion."""
    i0 = rng.uniform(1e-5, 0.05)
    r0 = rng.uniform(0.0, 0.3)
    rates = RateSeries(rng.uniform(0.0, 0.6, length - 1), rng.uniform(0.0, 0.3, length - 1))
    fr = simulate(i0, r0, rates)
    # beta < 1 and gamma < 1 keep i > 0 and i + r < 1; re-wrap to validate.
    return FractionSeries(fr.i, fr.r)


def write_synthetic_csv(path, days=DAYS, seed=0):
    fr = simulate(2e-4, 1e-4, synthetic_rates(days, seed))
    active = np.round(fr.i * POPULATION).astype(int)
    removed = np.round(fr.r * POPULATION).astype(int)
    deaths = removed // 40
    recovered = removed - deaths
    confirmed = active + removed
    lines = ["date,confirmed,recovered,deaths"]
    for k in range(days):
        day = START + dt.timedelta(days=k)
        lines.append(f"{day.isoformat()},{confirmed[k]},{recovered[k]},{deaths[k]}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def synthetic_csv(tmp_path):
    return write_synthetic_csv(tmp_path / "cases.csv")


@pytest.fixture
def constant_epidemic():
    """beta = 0.2, gamma = 0.1 exactly, 52 days, small outbreak (S close to n)."""
    rates = RateSeries(np.full(51, 0.2), np.full(51, 0.1))
    fr = simulate(1e-6, 0.0, rates)
    n = 1e7
    return EpidemicSeries(fr.i * n, fr.r * n, n)


# One line per acceptance criterion, printed after the run.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

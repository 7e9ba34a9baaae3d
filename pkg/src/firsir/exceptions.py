"""Exception hierarchy.

Input problems derive from :class:`InvalidInputError` (CLI exit code 1),
numerical breakdowns from :class:`NumericalError` (CLI exit code 2).
"""


class FirSirError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(FirSirError, ValueError):
    """Input violates a documented precondition."""


class NumericalError(FirSirError, ArithmeticError):
    """A computation could not be carried out on otherwise valid input."""


class ZeroInfectedError(NumericalError):
    def __init__(self, t):
        self.t = t
        super().__init__(f"infected count is not positive at t={t}")


class DepletedSusceptibleError(NumericalError):
    def __init__(self, t):
        self.t = t
        super().__init__(f"susceptible fraction 1 - i - r is depleted at t={t}")


class NonConvergenceError(NumericalError):
    def __init__(self, sweeps, step=None):
        self.sweeps = sweeps
        self.step = step
        where = "" if step is None else f" at forecast step {step}"
        super().__init__(f"Jacobi SVD did not converge in {sweeps} sweeps{where}")


class ZeroDenominatorError(NumericalError):
    """Reference series is identically zero, relative error is undefined."""


class MalformedRowError(InvalidInputError):
    def __init__(self, line, reason):
        self.line = line
        super().__init__(f"line {line}: {reason}")


class DuplicateDateError(InvalidInputError):
    def __init__(self, date, line):
        self.date = date
        self.line = line
        super().__init__(f"line {line}: duplicate date {date}")


class MissingDatesError(InvalidInputError):
    def __init__(self, dates):
        self.dates = list(dates)
        shown = ", ".join(str(d) for d in self.dates[:5])
        more = "" if len(self.dates) <= 5 else f" (+{len(self.dates) - 5} more)"
        super().__init__(f"missing dates: {shown}{more}")


class InsufficientSpanError(InvalidInputError):
    pass

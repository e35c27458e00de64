"""Exception hierarchy shared across the package."""


class NonstatError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(NonstatError):
    """Malformed CSV input; carries the 1-based row (and column) location."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class EmptyInput(NonstatError):
    """Input stream contained no data rows."""


class DegenerateComponent(NonstatError):
    """A component has zero sample variance where variation is required."""


class ConfigError(NonstatError):
    """A configuration value is outside its documented range."""


class WindowError(NonstatError):
    """A requested analysis window does not fit inside the series."""


class InsufficientData(NonstatError):
    """Too few observations for the requested estimate."""


class RankDeficient(NonstatError):
    """Regressor cross-product matrix is singular."""


class UnstableModel(NonstatError):
    """Autoregressive model has companion spectral radius >= 1."""


class CaseError(NonstatError):
    """Network case description is invalid (e.g. disconnected graph)."""


class DomainError(NonstatError):
    """Physical quantity outside its meaningful domain."""


class Infeasible(NonstatError):
    """Optimization problem has an empty feasible set."""


class IterationLimit(NonstatError):
    """Solver hit its iteration budget before reaching tolerance."""

    def __init__(self, message, best_residual=None):
        super().__init__(message)
        self.best_residual = best_residual


class StateError(NonstatError):
    """Operation applied to an object in the wrong state."""


class PeriodInfeasible(NonstatError):
    """Rolling horizon hit an infeasible period; carries the partial trace."""

    def __init__(self, period, partial_trace=None):
        super().__init__(f"dispatch infeasible at period {period}")
        self.period = period
        self.partial_trace = partial_trace

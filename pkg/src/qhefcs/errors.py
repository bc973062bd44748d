"""Exception hierarchy.

Two families matter to callers: :class:`ValidationError` (bad input, CLI exit
status 1) and :class:`SolverError` (numerics refused to produce a trustworthy
answer, CLI exit status 2).
"""


class QhefcsError(Exception):
    pass


class ValidationError(QhefcsError, ValueError):
    pass


class DomainError(ValidationError):
    """Argument outside the mathematical domain of a function."""


class InvalidParameters(ValidationError):
    def __init__(self, failures):
        self.failures = list(failures)
        super().__init__("invalid engine parameters: " + "; ".join(self.failures))


class ConfigError(ValidationError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("\n".join(str(p) for p in self.problems))


class UnknownKey(ConfigError):
    pass


class MalformedNumber(ConfigError):
    pass


class MissingRequired(ConfigError):
    pass


class ColumnMissing(ValidationError):
    pass


class NonFiniteData(ValidationError):
    pass


class SolverError(QhefcsError, ArithmeticError):
    pass


class NonRealDominant(SolverError):
    pass


class DegenerateDominant(SolverError):
    pass


class NoNullVector(SolverError):
    pass


class StepTooSmall(SolverError):
    pass


class NotConverged(SolverError):
    pass


class NoSecondZero(SolverError):
    pass


class NoBracket(SolverError):
    pass


class InconsistentMinimum(SolverError):
    pass


class DivisionByZeroCumulant(SolverError):
    pass


class PoleAtCarnot(SolverError):
    pass


class DegenerateDenominator(SolverError):
    pass

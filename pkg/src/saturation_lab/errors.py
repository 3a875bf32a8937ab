"""Exception types shared across the package."""


class SaturationLabError(Exception):
    pass


class DomainError(SaturationLabError, ValueError):
    """An argument lies outside [0, 1] (or another stated domain)."""


class NoBracketError(SaturationLabError, ValueError):
    pass


class EmptyIntervalError(SaturationLabError, ValueError):
    pass


class NonFiniteError(SaturationLabError, ArithmeticError):
    def __init__(self, x, value):
        super().__init__(f"non-finite sample h({x!r}) = {value!r}")
        self.x = x
        self.value = value


class ConvergenceError(SaturationLabError, RuntimeError):
    """Iteration cap hit; ``best`` holds the estimate reached so far."""

    def __init__(self, message, best):
        super().__init__(f"{message} (best estimate {best!r})")
        self.best = best


class NoEpsilonRootError(SaturationLabError, ValueError):
    pass


class NoPositiveGapError(SaturationLabError, ValueError):
    pass


class AdmissibilityError(SaturationLabError, ValueError):
    pass


class DimensionError(SaturationLabError, ValueError):
    pass


class PreconditionError(SaturationLabError, ValueError):
    pass

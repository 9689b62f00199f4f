"""Exception types shared across the package."""


class StaplabError(Exception):
    """Base class for all package-specific failures."""


class NumericalBlowup(StaplabError):
    """A solver produced a non-finite value or exceeded the magnitude cap."""

    def __init__(self, message: str, step_index: int | None = None):
        super().__init__(message)
        self.step_index = step_index


class StepSizeUnderflow(StaplabError):
    """An adaptive integrator's step fell below the configured floor."""


class InvalidArchitecture(StaplabError):
    pass


class NonFiniteOutput(StaplabError):
    def __init__(self, message: str, step_index: int | None = None):
        super().__init__(message)
        self.step_index = step_index


class NonFiniteLoss(StaplabError):
    pass


class ShapeMismatch(StaplabError):
    pass


class ZeroCostPattern(StaplabError):
    """All-false patterns are never valid cost-weighted candidates."""


class ZeroReference(StaplabError):
    pass


class EmptyPool(StaplabError):
    pass


class PoolExhausted(StaplabError):
    """The candidate pool emptied before the round budget was met."""


class InvalidModel(StaplabError):
    """Cost-model parameters violate their invariants (e.g. E <= 0)."""


class InvalidConfig(StaplabError):
    pass

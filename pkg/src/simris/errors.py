"""Exception hierarchy shared by every simris module."""


class SimrisError(Exception):
    """Base class for all simris errors."""


class DimensionMismatch(SimrisError, ValueError):
    pass


class SingularInnerLoop(SimrisError, ArithmeticError):
    """The inner reflection loop ``I - Q11 P22`` of a cascade cannot be inverted.

    ``block_index`` is set when the failure happened while assembling a SIM
    stack (1-based block number, ``"receiver"`` for the final cascade).
    """

    def __init__(self, message, block_index=None):
        super().__init__(message)
        self.block_index = block_index


class SingularSystem(SimrisError, ArithmeticError):
    pass


class SingularExtraction(SimrisError, ArithmeticError):
    pass


class DegenerateImpedance(SimrisError, ValueError):
    pass


class AssumptionViolated(SimrisError, ValueError):
    pass


class NotScalar(SimrisError, ValueError):
    pass


class ArchitectureMismatch(SimrisError, ValueError):
    pass


class ZeroChannel(SimrisError, ValueError):
    pass


class UnsupportedCombination(SimrisError, ValueError):
    pass


class CoincidentPoints(SimrisError, ValueError):
    pass


class ConfigError(SimrisError, ValueError):
    pass


class EmptyInput(SimrisError, ValueError):
    pass

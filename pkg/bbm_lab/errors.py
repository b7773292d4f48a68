class LabError(Exception):
    """Base class for every failure raised by bbm_lab."""


class ConfigError(LabError, ValueError):
    pass


class GridError(LabError, ValueError):
    """A grid or field invariant does not hold."""


class SupportOverflowError(LabError, ValueError):
    """A quadratic product would spill spectral mass past the grid edge."""


class QuadratureError(LabError, ValueError):
    pass


class ResourceBudgetError(LabError):
    pass


class SolverError(LabError):
    pass


class BlowupError(SolverError):
    pass


class HermitianViolationError(SolverError):
    pass

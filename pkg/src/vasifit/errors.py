"""Exception hierarchy shared by all vasifit modules."""


class VasifitError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(VasifitError, ValueError):
    pass


class DomainError(VasifitError, ValueError):
    pass


class NotPSDError(VasifitError, ValueError):
    """A matrix expected to be positive semidefinite has a clearly negative eigenvalue."""


class SingularityError(VasifitError, ValueError):
    pass


class ConfigurationError(VasifitError, ValueError):
    pass


class SynthesisError(VasifitError, RuntimeError):
    """Noise synthesis failed on every available route."""


# estimation

class EstimationError(VasifitError):
    """Base class for failures of the estimation pipeline."""


class GridError(EstimationError, ValueError):
    pass


class InsufficientDataError(EstimationError, ValueError):
    pass


class DegenerateInputError(EstimationError, ValueError):
    pass


class CareError(EstimationError):
    """Failure of the Riccati solver.

    The coefficient matrices are attached so callers can inspect the
    problem that could not be solved.
    """

    def __init__(self, message, B=None, C=None, D=None):
        super().__init__(message)
        self.B = B
        self.C = C
        self.D = D


class StructureError(CareError):
    pass


class SubspaceError(CareError):
    pass


class NoPDSolutionError(CareError):
    pass


class DegenerateEquationError(CareError):
    pass


# harness and I/O

class HarnessError(VasifitError, RuntimeError):
    pass


class SchemaError(VasifitError, ValueError):
    pass


class OrderingError(VasifitError, ValueError):
    pass

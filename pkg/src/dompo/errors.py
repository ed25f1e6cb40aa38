"""Exception types shared across the package."""


class DompoError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(DompoError, ValueError):
    """A parameter set or configuration file is invalid."""


class DomainError(DompoError, ValueError):
    """An operation was called outside its domain of validity."""


class NumericError(DompoError, RuntimeError):
    """A numerical procedure failed or produced inconsistent results."""


class DivergenceError(NumericError):
    """A trajectory left the divergence guard radius."""


class StiffnessError(NumericError):
    """The explicit integrator could not resolve the fastest time scale."""


class ConsistencyError(NumericError):
    """An internal cross-check (residual, reality, symmetry) failed."""


class DefectiveMatrixError(NumericError):
    """The eigenvector matrix is too ill-conditioned for the spectral route."""

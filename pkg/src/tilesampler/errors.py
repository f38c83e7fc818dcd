"""Exception types shared across the package."""


class TileSamplerError(Exception):
    """Base class for all tilesampler errors."""


class DomainError(TileSamplerError):
    """A face/triangle set is not a valid (simply-connected) domain."""


class OutOfDomainError(TileSamplerError):
    """A tile refers to a face outside the domain."""


class OverlapError(TileSamplerError):
    """Two tiles cover the same face."""


class CoverageError(TileSamplerError):
    """Some domain face is left uncovered."""


class InconsistencyError(TileSamplerError):
    """A state grid does not encode a consistent configuration."""


class DomainMismatchError(TileSamplerError):
    """Two objects live on different domains (or references)."""


class CapacityError(TileSamplerError):
    """Grid exceeds the per-site stream parameterization capacity."""


class OutOfGridError(TileSamplerError):
    """Requested site lies outside the stream family's grid."""


class IceRuleViolation(TileSamplerError):
    """An edge pattern at a vertex is not one of the six allowed types."""


class BoundaryFaceError(TileSamplerError):
    """A face operation was requested on a non-interior face."""


class InfeasibleBoundary(TileSamplerError):
    """The fixed boundary admits no configuration."""


class UntileableDomain(TileSamplerError):
    """A sampler was asked to run on a domain with no tilings."""


class NonMonotoneWeights(TileSamplerError):
    """Weights do not satisfy the monotonicity condition required by CFTP."""


class ConvergenceCapExceeded(TileSamplerError):
    """CFTP did not coalesce within the configured number of doublings."""


class StateSpaceTooLarge(TileSamplerError):
    """Exhaustive enumeration refused: state space above the guard limit."""


class EmptyArchive(TileSamplerError):
    """A statistics operation was asked to reduce an empty sample archive."""

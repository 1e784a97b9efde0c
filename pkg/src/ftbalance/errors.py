"""Exception hierarchy shared by all solver modules."""


class FrontTrackError(Exception):
    """Base class for all solver errors."""


class HyperbolicityLoss(FrontTrackError):
    """Eigenvalue gap fell below the declared separation."""


class ComplexEigenvalue(FrontTrackError):
    """Characteristic matrix produced eigenvalues with imaginary parts."""


class SingularEigenbasis(FrontTrackError):
    """Right-eigenvector matrix is not invertible within conditioning limits."""


class NotEquilibrium(FrontTrackError):
    """State passed as an equilibrium does not annihilate the source."""


class EmptyWindow(FrontTrackError):
    """Envelope window contains fewer than two grid points."""


class NoConvergence(FrontTrackError):
    """Fixed-point sweep did not stabilize within the iteration budget."""


class DomainEscape(FrontTrackError):
    """A computed state left the admissible box."""


class NewtonDivergence(FrontTrackError):
    """Damped Newton failed to reduce the Riemann residual."""


class JumpTooLarge(FrontTrackError):
    """Riemann data outside the small-jump regime."""


class ContinuationFailure(FrontTrackError):
    """Hugoniot arc continuation failed to converge at a step."""


class EventOverflow(FrontTrackError):
    """Event count exceeded the per-window cap."""


class OutOfWindow(FrontTrackError):
    """Requested time is outside the solved interval."""


class UnboundedSupport(FrontTrackError):
    """Initial datum lacks compact essential support."""


class TVBlowup(FrontTrackError):
    """Wave functional exceeded the configured fence."""


class GridMismatch(FrontTrackError):
    """Reduced-flux curves could not be merged onto a common grid."""


class NonTransversalEdge(FrontTrackError):
    """Polygon edge is parallel to a crossing front."""


class SchemaError(FrontTrackError):
    """Config document violates the schema; carries the offending field path."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


class ConstraintError(FrontTrackError):
    """Config values are individually valid but jointly inconsistent."""


class IoError(FrontTrackError):
    """File output could not be produced."""

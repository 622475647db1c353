"""Exception hierarchy shared by all kerrlab modules."""


class KerrError(ValueError):
    """Base class for every error raised by kerrlab."""


class ParameterError(KerrError):
    """Spacetime parameters outside the slow-Kerr regime 0 < |a| < M."""


class SingularityError(KerrError):
    """Evaluation on the ring singularity (rho = 0)."""


class HorizonError(KerrError):
    """Evaluation of a Boyer-Lindquist quantity where Delta(r) = 0."""


class ChartError(KerrError):
    """A point or vector was given in the wrong chart."""


class DomainError(KerrError):
    """Argument outside the domain of a special function."""


class PoleError(KerrError):
    """Evaluation at a pole of a rational expression (e.g. r = M)."""


class DegeneratePolynomialError(KerrError):
    """Root finding requested for the zero polynomial."""


class NoOscillationError(KerrError):
    """The polar quadratic has no real roots (negative discriminant)."""


class ConstantThetaError(KerrError):
    """The orbit has a constant polar angle, so no oscillation increment exists."""


class ForbiddenRegionError(KerrError):
    """R(r) or Theta(theta) is negative: the state is not on a real geodesic."""


class RescalingError(KerrError):
    """Rescaled constants L/E, Q/E^2 requested with E = 0."""


class NonNullError(KerrError):
    """Constants or tangent do not describe a null geodesic."""


class ConsistencyError(KerrError):
    """An internal cross-check between independent routes failed."""


class StepFailure(KerrError):
    """The adaptive integrator could not keep the step above the underflow limit.

    The partial trajectory up to the last accepted state is kept on
    ``trajectory``.
    """

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class InsufficientLengthWarning(UserWarning):
    """Radial extents are still drifting at the end of the trajectory."""

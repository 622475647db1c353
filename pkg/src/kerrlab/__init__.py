"""Null geodesics of the slow Kerr spacetime in Kerr-star coordinates.

The package evaluates the metric and its constants of motion, isolates the
roots of the radial and polar potentials, integrates null geodesics across
both horizons, and computes the time increment of the Q < 0 spherical
orbits through complete elliptic integrals.
"""

from .classifier import CaseVerdict, classify, radial_extent
from .constants import MotionConstants, RescaledConstants, constants_from_state
from .elliptic import comp_D, comp_E, comp_K, hyp2f1, incomp_E, incomp_F
from .errors import (ChartError, ConsistencyError, ConstantThetaError, DegeneratePolynomialError,
                     DomainError, ForbiddenRegionError, HorizonError, InsufficientLengthWarning,
                     KerrError, NoOscillationError, NonNullError, ParameterError, PoleError,
                     RescalingError, SingularityError, StepFailure)
from .integrator import (Event, GeodesicState, Trajectory, first_order_rhs, integrate,
                         null_tangent, random_null_state, state_from_constants)
from .kerr import (BLPoint, CanonicalFrame, KerrParams, KerrStarPoint, TangentVector, bl_to_star,
                   canonical_frame, christoffel_star, horizon_radii, metric_bl, metric_star,
                   star_to_bl)
from .potentials import PolarPotential, RadialPoly, RootReport, radial_poly, radial_roots
from .spherical import (ExistenceWindow, SphericalOrbit, delta_t, delta_t_quadrature,
                        existence_window, spherical_constants, spherical_orbit)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

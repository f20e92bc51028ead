"""Integration of O_m-invariant functions on (R^m)^k through the orbit space."""

from .euler import (angles_from_rotation, angles_from_unit_vector, compose_euler,
                    euler_decomposition, rotation_from_angles, vector_from_angles)
from .exceptions import *  # noqa: F401,F403
from .integrands import REGISTRY, InvariantIntegrand, get_integrand, register
from .integrator import (IntegralEstimate, MCConfig, compare_methods, diag_from_minors, integrate,
                         integrate_ambient_mc, integrate_domain_w, integrate_orbit_u,
                         jacobian_w_to_u)
from .linalg import gram, is_in_image, leading_minors, lift, semidefinite_cholesky
from .measure import hilbert_density, orthogonal_group_volume, sphere_volume, stiefel_volume
from .reduction import AngleSchedule, angular_volume, angular_weight, reduce

__version__ = "0.1.0"

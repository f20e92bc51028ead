"""Exception hierarchy.

Every error carries a short machine-parsable ``code``.  Validation errors
(bad shapes, coregularity violations, unknown integrands) map to CLI exit
status 1; numerical errors (a point outside the image, a matrix that is
not a rotation, ...) map to exit status 2.
"""


class OrbitSpaceError(Exception):
    code = "error"

    def __init__(self, message, **context):
        super().__init__(message)
        self.context = context


class ValidationError(OrbitSpaceError, ValueError):
    code = "validation"


class NumericalError(OrbitSpaceError, ArithmeticError):
    code = "numerical"


class DimensionMismatch(ValidationError):
    code = "dimension_mismatch"


class NotCoregular(ValidationError):
    """Raised when k > m: the inner products are then algebraically dependent."""

    code = "not_coregular"


class UnknownIntegrand(ValidationError):
    code = "unknown_integrand"


class IntegrandMismatch(ValidationError):
    """The two views of an invariant integrand disagree (f != F o gram)."""

    code = "integrand_mismatch"


class UnsupportedDecayClass(ValidationError):
    code = "unsupported_decay_class"


class QuadratureUnavailable(ValidationError):
    code = "quadrature_unavailable"


class NotPositiveSemidefinite(NumericalError):
    code = "not_positive_semidefinite"


class NotInImage(NotPositiveSemidefinite):
    code = "not_in_image"


class NotSpecialOrthogonal(NumericalError):
    code = "not_special_orthogonal"


class NotEulerFrame(NumericalError):
    code = "not_euler_frame"


class DegenerateAngles(NumericalError):
    code = "degenerate_angles"


class ZeroVector(NumericalError):
    code = "zero_vector"


class BoundaryPoint(NumericalError):
    code = "boundary_point"


class SingularDensity(NumericalError):
    code = "singular_density"

"""Exception types with machine-readable codes.

Every error raised by the library derives from ``WallcrossError`` and
carries a short upper-case ``code`` that the command line front-end
copies into its JSON report.
"""


class WallcrossError(Exception):
    code = "ERROR"

    def __init__(self, message="", **details):
        super().__init__(message)
        self.details = details


class ContextError(WallcrossError):
    code = "CONTEXT_MISMATCH"


class CompositionError(WallcrossError):
    code = "UNDEFINED_COMPOSITION"


class ConfigError(WallcrossError):
    code = "CONFIG"


class ConeError(WallcrossError):
    code = "OUTSIDE_CONE"


class DegenerateChargeError(WallcrossError):
    code = "DEGENERATE_CHARGE"


class RayOnBoundaryError(WallcrossError):
    code = "RAY_ON_BOUNDARY"


class AmbiguousOrderError(WallcrossError):
    code = "AMBIGUOUS_ORDER"


class NoSolutionError(WallcrossError):
    code = "NO_SOLUTION"


class DomainError(WallcrossError):
    code = "DOMAIN"


class QuadratureError(WallcrossError):
    code = "QUADRATURE"


class XiNearRayError(WallcrossError):
    code = "XI_NEAR_RAY"


class SingularPointError(WallcrossError):
    code = "SINGULAR_POINT"


class SingularBaseError(WallcrossError):
    code = "SINGULAR_BASE"


class NotPositiveDefiniteError(WallcrossError):
    code = "NOT_POSITIVE_DEFINITE"


class ConstraintError(WallcrossError):
    code = "CONSTRAINT"


class NoConvergenceError(WallcrossError):
    code = "NO_CONVERGENCE"


class InconsistencyError(WallcrossError):
    code = "INCONSISTENT"


class WallError(WallcrossError):
    code = "COINCIDENT_RAYS"


class DegenerateSurfaceError(WallcrossError):
    code = "DEGENERATE_SURFACE"


class VerificationFailure(WallcrossError):
    code = "VERIFICATION_FAILED"


ALL_ERRORS = [
    ContextError, CompositionError, ConfigError, ConeError,
    DegenerateChargeError, RayOnBoundaryError, AmbiguousOrderError,
    NoSolutionError, DomainError, QuadratureError, XiNearRayError,
    SingularPointError, SingularBaseError, NotPositiveDefiniteError,
    ConstraintError, NoConvergenceError, InconsistencyError, WallError,
    DegenerateSurfaceError, VerificationFailure,
]

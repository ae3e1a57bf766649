"""Exception and warning types shared across the package."""


class GammaPoleError(ValueError):
    """Gamma function requested at a non-positive integer."""


class HypergeometricParameterError(ValueError):
    """Lower parameter of the Gauss series is a non-positive integer, or the
    argument lies outside the supported range."""


class HypergeometricDivergenceError(ValueError):
    """Series evaluated at argument 1 with non-positive parametric excess."""


class HypergeometricConvergenceError(RuntimeError):
    """Term cap exceeded before the requested tolerance was reached."""


class CoincidentPointsError(ValueError):
    """Kernel evaluation requested for a coincident point pair."""


class MeshInvariantError(ValueError):
    """Generator curve violates the closure / right-angle invariants."""


class EvaluationAtNodeError(ValueError):
    """Off-surface potential evaluation requested at a quadrature node; use
    the trace operations instead."""


class SingularOperatorError(RuntimeError):
    """Second-kind system is numerically singular; carries the offending
    pivot or residual magnitude in the message."""


class NearSurfaceWarning(UserWarning):
    """Plain quadrature evaluation requested closer to the surface than half
    the local node spacing; accuracy degrades in the near field."""


class NearBoundaryPoleWarning(UserWarning):
    """Green's-function pole closer to the boundary than twice the local
    node spacing."""

"""Exception hierarchy shared by the kernels, solvers and the CLI."""


class GalileanError(Exception):
    """Base class for all errors raised by galilean_elastica."""


class NotAdmissible(GalileanError):
    """Curve tangent does not have unit first component."""


class CurvatureVanishes(GalileanError):
    """Curvature below threshold; frame and torsion are undefined."""


class DegenerateJet(GalileanError):
    """Derivative jet too degenerate for the general-parameter formulas."""


class DegenerateChart(GalileanError):
    """Chart is not regular at the requested point (W below floor)."""


class BothDenominatorsVanish(GalileanError):
    """Neither second-form variant is usable (X1 and X2 both vanish)."""


class ConstraintViolated(GalileanError):
    """Curve does not satisfy the unit-speed constraint within tolerance."""


class LeftDomain(GalileanError):
    """Integration left the chart domain."""


class StepFailure(GalileanError):
    """Integrator produced a non-finite state."""


class SingularConstraint(GalileanError):
    """The speed constraint cannot be solved for the requested velocity component."""


class SingularU1(SingularConstraint):
    """Constraint cannot be solved for du1 (g does not depend on du1)."""


class SingularU2(SingularConstraint):
    """Constraint cannot be solved for du2 (g does not depend on du2)."""


class NoConvergence(GalileanError):
    """Solver failed to meet its tolerances; carries the best iterate."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class CatalogParameterError(GalileanError, ValueError):
    """Catalog parameters outside the entry's preconditions."""


class NonpositiveRadius(CatalogParameterError):
    pass


class ZeroPitch(CatalogParameterError):
    pass


class ProfileNotArcLength(CatalogParameterError):
    pass


class DegenerateProfile(CatalogParameterError):
    pass


class SchemaError(GalileanError):
    """Problem spec failed to parse or validate."""


class DomainError(GalileanError):
    """Requested point or curve lies outside the chart domain."""

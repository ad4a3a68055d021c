"""Exception hierarchy.

Everything raised on purpose by the package derives from Advect2dError so
callers can catch one type at the CLI boundary.  Configuration problems are
kept separate from numerical failures because they map to different process
exit codes.
"""


class Advect2dError(Exception):
    """Base class for all package errors."""


class ConfigError(Advect2dError):
    """Bad run configuration (unknown keys, malformed values, missing files)."""


# --- expressions ---------------------------------------------------------


class FieldSyntaxError(ConfigError):
    """Malformed expression text; carries the byte offset of the problem."""

    def __init__(self, message, position):
        super().__init__("%s (at offset %d)" % (message, position))
        self.position = position


class UnknownIdentifier(FieldSyntaxError):
    """Identifier that is not x, y, a bound parameter, or a known function."""

    def __init__(self, name, position):
        FieldSyntaxError.__init__(self, "unknown identifier '%s'" % name, position)
        self.name = name


class DomainError(Advect2dError):
    """Expression evaluated outside its domain (log/sqrt of a negative,
    division by zero); carries the offending point."""

    def __init__(self, point, detail=""):
        msg = "field evaluation failed at (%.17g, %.17g)" % (point[0], point[1])
        if detail:
            msg += ": " + detail
        super().__init__(msg)
        self.point = tuple(point)


class NonDifferentiable(Advect2dError):
    """Derivative requested at a kink of abs/min/max."""

    def __init__(self, point):
        super().__init__(
            "derivative hit an abs/min/max kink at (%.17g, %.17g)"
            % (point[0], point[1])
        )
        self.point = tuple(point)


# --- geometry ------------------------------------------------------------


class GeometryError(Advect2dError):
    pass


class SelfIntersecting(GeometryError):
    """Polygon boundary crosses itself."""


class DegenerateArea(GeometryError):
    """Polygon has (numerically) zero area or a zero-length edge."""


class EmptySet(GeometryError):
    """Distance requested between arc sets one of which is empty."""


# --- characteristic flow -------------------------------------------------


class FlowError(Advect2dError):
    pass


class StartOutside(FlowError):
    """Flow started from a point outside the closed domain."""

    def __init__(self, point):
        super().__init__(
            "start point (%.17g, %.17g) is outside the closure"
            % (point[0], point[1])
        )
        self.point = tuple(point)


class StepUnderflow(FlowError):
    """Adaptive step shrank below the resolvable size (field too rough)."""


class AmbiguousArc(FlowError):
    """Boundary arc whose label could not be decided by sampling or probing."""


# --- solver --------------------------------------------------------------


class SolverError(Advect2dError):
    pass


class FootpointOnCharacteristicArc(SolverError):
    """Backward orbit left the domain through a characteristic arc, so no
    usable boundary datum exists there."""


class AttenuationNotDecayed(SolverError):
    """Backward orbit was truncated at the time horizon while the accumulated
    attenuation was still above the cutoff, so the boundary term cannot be
    dropped."""


class MissingBoundaryData(SolverError):
    """Footpoint landed on an arc not covered by any boundary datum."""


class TooCloseToBoundary(SolverError):
    """Finite-difference stencil for the strong residual could not fit inside
    the domain at this point."""


class TestFunctionNotAdmissible(SolverError):
    """Weak-form test function does not vanish on the required boundary part."""

    __test__ = False  # not a pytest class, despite the name


# --- diagnostics ---------------------------------------------------------


class DiagnosticsError(Advect2dError):
    pass


class HypothesisFailed(DiagnosticsError):
    """A standing assumption (e.g. a positive reaction margin) fails, so the
    requested constant is undefined."""


class NotVanishing(DiagnosticsError):
    """Function handed to the vanishing-trace check does not actually vanish
    on the stated boundary part."""


class ExponentOutOfWindow(DiagnosticsError):
    """Profile exponent outside the window that makes the graph norm finite
    while the trace norm diverges."""

"""Built-in example problems with closed-form reference values.

Each example bundles a polygon, a velocity field, the expected boundary
labels, and oracle callables (exit times, norm values) that are plain
algebra, independent of any quadrature or ODE code.  They double as the
regression anchors for the whole package.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

from .characteristics import (CHARACTERISTIC, INFLOW, OUTFLOW, SolverConfig,
                              classify_boundary)
from .fields import constant_field, parse_field, parse_vector_field
from .geometry import build_domain


@dataclass
class BuiltinExample:
    """A ready-made problem: geometry, field, expected labels, oracles."""

    name: str
    domain: object
    beta: object
    expected_labels: dict          # edge index -> label
    component_points: list         # expected closure-meeting points
    separation_distance: float     # exact dist(outflow, inflow)
    exit_time_oracle: object = None   # (x, y) on the inflow part -> tau
    segment_edges: dict = dc_field(default_factory=dict)
    mu: object = None
    f: object = None
    g: object = None
    exact_solution: object = None
    notes: str = ""
    cfg: object = None
    _classification: object = None

    @property
    def classification(self):
        if self._classification is None:
            self._classification = classify_boundary(
                self.domain, self.beta, self.cfg or SolverConfig())
        return self._classification

    def labels_match(self):
        """Compare the computed labels against the expected per-edge ones:
        every edge must be a single full arc with the expected label."""
        got = {}
        for la in self.classification.arcs:
            if la.arc.edge in got:
                return False
            if la.arc.s0 > 1e-9 or la.arc.s1 < 1.0 - 1e-9:
                return False
            got[la.arc.edge] = la.label
        return got == self.expected_labels


def example_triangle(cfg=None):
    """Isoceles triangle opening upward with a horizontal unit field.

    The two slanted edges carry the flow in and out; the top edge is
    characteristic; the inflow and outflow closures meet at the bottom
    vertex, so they are not separated.  Orbits entering at height y cross
    in time 2y, which vanishes toward the meeting point."""
    dom = build_domain([(0.0, 0.0), (1.0, 1.0), (-1.0, 1.0)])
    beta = parse_vector_field("1", "0")

    def tau(x, y):
        # inflow point (-y, y) exits at (y, y) with unit speed
        return 2.0 * y

    return BuiltinExample(
        name="triangle",
        domain=dom,
        beta=beta,
        expected_labels={0: OUTFLOW, 1: CHARACTERISTIC, 2: INFLOW},
        component_points=[(0.0, 0.0)],
        separation_distance=0.0,
        exit_time_oracle=tau,
        notes="transit time 2y decays to zero toward the corner",
        cfg=cfg,
    )


def um_profile(m, alpha):
    """Boundary-layer profile m^alpha (1 - m y)^2 below y = 1/m, zero above.

    Returns the field and closed-form p-th powers of its norms on the
    triangle example: the profile is constant along the horizontal flow, so
    the graph norm equals the plain Lp norm.  For 1/p < alpha < 2/p the
    graph norm shrinks with m while the outflow trace blows up like
    m^{(p alpha - 1)/p}.
    """
    m = float(m)
    if m < 1.0:
        raise ValueError("profile needs m >= 1")
    fld = parse_field("c * max(0, 1 - m*y)^2",
                      params={"c": m ** alpha, "m": m})

    def graph_pow(p):
        p = float(p)
        return 2.0 * m ** (p * alpha - 2.0) / ((2 * p + 1) * (2 * p + 2))

    def outflow_pow(p):
        p = float(p)
        return m ** (p * alpha - 1.0) / (2 * p + 1)

    oracles = {
        "kink_y": 1.0 / m,
        "graph_pow": graph_pow,
        "lp_pow": graph_pow,      # directional derivative is zero
        "outflow_pow": outflow_pow,
        "inflow_pow": outflow_pow,  # same profile on the mirrored edge
    }
    return fld, oracles


def example_seven_segments(cfg=None):
    """Polygon of seven straight segments with a notch in the top edge,
    horizontal unit field.

    Labels by the flow: the two left-leaning slants are inflow, the two
    right-leaning slants are outflow, the horizontals are characteristic.
    The notch tip is the single point where the inflow and outflow closures
    meet; the other segments stay apart.  Orbits from the right inflow slant
    (x, x-2) need time 7 - 2x >= 1 to cross, bounded away from zero.

    Some written descriptions of this geometry list the fourth segment
    among the characteristic ones; its normal component is -1/sqrt(2), so
    the flow classification puts it in the inflow part and the horizontal
    fifth segment in the characteristic part, as returned here.
    """
    dom = build_domain([
        (0.0, 0.0), (5.0, 0.0), (4.0, 1.0), (3.0, 1.0),
        (2.5, 0.5), (2.0, 1.0), (1.0, 1.0),
    ])
    beta = parse_vector_field("1", "0")

    def tau(x, y):
        # valid on the right inflow slant from (3,1) down to the notch tip
        return 7.0 - 2.0 * x

    return BuiltinExample(
        name="seven_segments",
        domain=dom,
        beta=beta,
        expected_labels={
            0: CHARACTERISTIC,   # bottom
            1: OUTFLOW,          # right slant
            2: CHARACTERISTIC,   # top, right of the notch
            3: INFLOW,           # notch, right side
            4: OUTFLOW,          # notch, left side
            5: CHARACTERISTIC,   # top, left of the notch
            6: INFLOW,           # left slant
        },
        component_points=[(2.5, 0.5)],
        separation_distance=0.0,
        exit_time_oracle=tau,
        # edges here run counterclockwise from the origin; the conventional
        # description of this polygon numbers the segments 1..7 clockwise
        # from the left slant
        segment_edges={1: 6, 2: 5, 3: 4, 4: 3, 5: 2, 6: 1, 7: 0},
        notes="transit time from the notch-side inflow stays >= 1",
        cfg=cfg,
    )


def example_square(cfg=None):
    """Unit square with horizontal unit field, unit reaction, no source,
    and boundary value one on the left edge: the solution is exp(-x).

    The inflow and outflow edges are the two vertical ones, a distance 1
    apart, so this is the fully separated reference case."""
    dom = build_domain([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
    beta = parse_vector_field("1", "0")
    exact = parse_field("exp(-x)")
    return BuiltinExample(
        name="square",
        domain=dom,
        beta=beta,
        expected_labels={0: CHARACTERISTIC, 1: OUTFLOW,
                         2: CHARACTERISTIC, 3: INFLOW},
        component_points=[],
        separation_distance=1.0,
        exit_time_oracle=lambda x, y: 1.0,
        mu=parse_field("1"),
        f=None,
        g=constant_field(1.0),
        exact_solution=exact,
        notes="closed-form solution exp(-x); adjoint solution exp(x-1)",
        cfg=cfg,
    )


_REGISTRY = {
    "triangle": example_triangle,
    "seven_segments": example_seven_segments,
    "square": example_square,
}


def example_names():
    return sorted(_REGISTRY)


def get_example(name, cfg=None):
    try:
        maker = _REGISTRY[name]
    except KeyError:
        raise KeyError(
            "unknown example %r; available: %s"
            % (name, ", ".join(example_names()))
        ) from None
    return maker(cfg=cfg)

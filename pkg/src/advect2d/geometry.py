"""Polygonal domains.

A domain is a simple polygon with counter-clockwise vertex order; edges are
numbered by their starting vertex, and a point on the boundary is addressed
as (edge, s) with s in [0, 1] along that edge.  ArcRef picks out the open
sub-arc (edge, s0, s1).
"""
from __future__ import annotations

import math
import warnings
from typing import NamedTuple

import numpy as np

from ._backend import kernel
from .errors import DegenerateArea, EmptySet, GeometryError, SelfIntersecting


class WrongOrientation(UserWarning):
    """Vertex list was clockwise and has been reversed."""


class Point2(NamedTuple):
    x: float
    y: float


class ArcRef(NamedTuple):
    """Sub-arc (edge, s0, s1) of a polygon edge, 0 <= s0 < s1 <= 1."""

    edge: int
    s0: float
    s1: float


class Containment(NamedTuple):
    kind: str  # 'interior' | 'boundary' | 'exterior'
    edge: int | None
    s: float | None


def _seg_seg_distance(p0, p1, q0, q1):
    """Distance between closed segments p0-p1 and q0-q1."""
    d1 = (p1[0] - p0[0], p1[1] - p0[1])
    d2 = (q1[0] - q0[0], q1[1] - q0[1])
    denom = d1[0] * d2[1] - d1[1] * d2[0]
    rx = q0[0] - p0[0]
    ry = q0[1] - p0[1]
    if abs(denom) > 1e-14 * (abs(d1[0] * d2[1]) + abs(d1[1] * d2[0]) + 1e-300):
        t = (rx * d2[1] - ry * d2[0]) / denom
        u = (rx * d1[1] - ry * d1[0]) / denom
        if 0.0 <= t <= 1.0 and 0.0 <= u <= 1.0:
            return 0.0

    def point_seg(px, py, a, d):
        L2 = d[0] * d[0] + d[1] * d[1]
        s = ((px - a[0]) * d[0] + (py - a[1]) * d[1]) / L2 if L2 > 0 else 0.0
        s = min(1.0, max(0.0, s))
        return math.hypot(px - a[0] - s * d[0], py - a[1] - s * d[1])

    return min(
        point_seg(p0[0], p0[1], q0, d2),
        point_seg(p1[0], p1[1], q0, d2),
        point_seg(q0[0], q0[1], p0, d1),
        point_seg(q1[0], q1[1], p0, d1),
    )


class PolygonalDomain:
    """Simple CCW polygon with boundary addressing and containment tests."""

    def __init__(self, vertices, eps_geom_rel=1e-9):
        self.vertices = np.asarray(vertices, dtype=np.float64)
        self.n_edges = self.vertices.shape[0]
        self.vx = np.ascontiguousarray(self.vertices[:, 0])
        self.vy = np.ascontiguousarray(self.vertices[:, 1])
        rolled = np.roll(self.vertices, -1, axis=0)
        self._edge_vec = rolled - self.vertices
        self._edge_len = np.hypot(self._edge_vec[:, 0], self._edge_vec[:, 1])
        self.perimeter = float(self._edge_len.sum())
        self.area = 0.5 * float(
            np.sum(self.vx * rolled[:, 1] - rolled[:, 0] * self.vy)
        )
        dx = self.vx[:, None] - self.vx[None, :]
        dy = self.vy[:, None] - self.vy[None, :]
        self.diameter = float(np.sqrt((dx * dx + dy * dy).max()))
        self.eps_geom = eps_geom_rel * self.diameter
        self.bbox = (
            float(self.vx.min()), float(self.vy.min()),
            float(self.vx.max()), float(self.vy.max()),
        )

    # --- boundary addressing ---------------------------------------------

    def edge_length(self, edge):
        return float(self._edge_len[edge])

    def edge_tangent(self, edge):
        """Unit tangent along the edge direction."""
        L = self._edge_len[edge]
        return Point2(float(self._edge_vec[edge, 0] / L),
                      float(self._edge_vec[edge, 1] / L))

    def edge_normal(self, edge):
        """Outward unit normal (CCW polygon: tangent rotated by -90 deg)."""
        t = self.edge_tangent(edge)
        return Point2(t.y, -t.x)

    def point_on(self, edge, s):
        return Point2(
            float(self.vertices[edge, 0] + s * self._edge_vec[edge, 0]),
            float(self.vertices[edge, 1] + s * self._edge_vec[edge, 1]),
        )

    def arc_length(self, arc):
        return (arc.s1 - arc.s0) * self.edge_length(arc.edge)

    def arc_endpoints(self, arc):
        return self.point_on(arc.edge, arc.s0), self.point_on(arc.edge, arc.s1)

    def vertex_near(self, point, tol=None):
        """Index of a vertex within tol of the point, or None."""
        tol = self.eps_geom if tol is None else tol
        d = np.hypot(self.vx - point[0], self.vy - point[1])
        i = int(np.argmin(d))
        return i if d[i] <= tol else None

    # --- predicates --------------------------------------------------------

    def nearest_boundary(self, point):
        edge, s, dist = kernel.nearest_edge(self.vx, self.vy, point[0], point[1])
        return int(edge), float(s), float(dist)

    def signed_distance(self, point):
        return float(kernel.signed_distance(self.vx, self.vy, point[0], point[1]))

    def contains(self, point):
        """Ternary containment with boundary tolerance eps_geom."""
        edge, s, dist = self.nearest_boundary(point)
        if dist <= self.eps_geom:
            return Containment("boundary", edge, s)
        if kernel.point_in_polygon(self.vx, self.vy, point[0], point[1]):
            return Containment("interior", None, None)
        return Containment("exterior", None, None)

    def contains_batch(self, xs, ys):
        """Even-odd parity only (no boundary band); for grid sampling."""
        return kernel.contains_batch(
            self.vx, self.vy,
            np.ascontiguousarray(xs, dtype=np.float64),
            np.ascontiguousarray(ys, dtype=np.float64),
        )


def build_domain(vertices, eps_geom_rel=1e-9):
    """Validate a vertex list and build the domain.

    Rejects self-intersecting boundaries, zero area and zero-length edges;
    a clockwise list is reversed with a WrongOrientation warning.
    """
    verts = np.asarray(vertices, dtype=np.float64)
    if verts.ndim != 2 or verts.shape[1] != 2:
        raise GeometryError("vertices must be an (n, 2) array")
    n = verts.shape[0]
    if n < 3:
        raise GeometryError("need at least 3 vertices, got %d" % n)
    if not np.all(np.isfinite(verts)):
        raise GeometryError("vertices must be finite")

    rolled = np.roll(verts, -1, axis=0)
    edges = rolled - verts
    lens = np.hypot(edges[:, 0], edges[:, 1])
    scale = float(np.abs(verts).max()) + float(lens.max() if lens.size else 0.0)
    if np.any(lens <= 1e-12 * max(scale, 1e-300)):
        raise DegenerateArea("zero-length edge")

    area2 = float(np.sum(verts[:, 0] * rolled[:, 1] - rolled[:, 0] * verts[:, 1]))
    if abs(area2) <= 1e-12 * max(scale, 1e-300) ** 2:
        raise DegenerateArea("polygon area is numerically zero")
    if area2 < 0:
        warnings.warn(
            "vertex list is clockwise; reversing", WrongOrientation, stacklevel=2
        )
        verts = verts[::-1].copy()
        rolled = np.roll(verts, -1, axis=0)
        edges = rolled - verts

    touch_tol = 1e-12 * max(scale, 1e-300)
    for i in range(n):
        for j in range(i + 1, n):
            if j == i or (j == (i + 1) % n) or (i == (j + 1) % n):
                continue
            d = _seg_seg_distance(verts[i], rolled[i], verts[j], rolled[j])
            if d <= touch_tol:
                raise SelfIntersecting(
                    "edges %d and %d intersect or touch" % (i, j)
                )
    # fold-back spikes between consecutive edges
    for i in range(n):
        j = (i + 1) % n
        cross = edges[i, 0] * edges[j, 1] - edges[i, 1] * edges[j, 0]
        dot = edges[i, 0] * edges[j, 0] + edges[i, 1] * edges[j, 1]
        if abs(cross) <= touch_tol * max(lens[i], lens[j]) and dot < 0:
            raise SelfIntersecting("edges %d and %d fold back" % (i, j))

    return PolygonalDomain(verts, eps_geom_rel=eps_geom_rel)


def set_distance(domain, arcs_a, arcs_b):
    """Distance between two closed unions of boundary arcs."""
    if not arcs_a or not arcs_b:
        raise EmptySet("set_distance needs nonempty arc lists")

    def seg(arc):
        p0, p1 = domain.arc_endpoints(arc)
        return (p0.x, p0.y), (p1.x, p1.y)

    best = math.inf
    for a in arcs_a:
        pa0, pa1 = seg(a)
        for b in arcs_b:
            pb0, pb1 = seg(b)
            best = min(best, _seg_seg_distance(pa0, pa1, pb0, pb1))
    return best

"""Coefficient fields over the plane.

Fields are parsed expressions in x and y, evaluated through the numeric
kernel's register tapes.  Derivatives are exact forward-mode duals, not
finite differences; abs/min/max kinks are reported instead of smoothed
over.  Essential sup/inf estimates use an inclusive lattice over the
domain's bounding box (nested under grid doubling) plus per-edge boundary
samples, followed by local refinement around the extremum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import expr
from ._backend import kernel
from .errors import DomainError, NonDifferentiable
from .geometry import Point2


class ScalarField:
    """Scalar expression field u(x, y)."""

    def __init__(self, src, params=None):
        self.src = src
        self.params = dict(params) if params else {}
        self.ast = expr.parse(src, self.params)
        self.tape = expr.compile_tape(self.ast)

    @classmethod
    def from_ast(cls, ast):
        obj = cls.__new__(cls)
        obj.ast = ast
        obj.src = expr.to_src(ast)
        obj.params = {}
        obj.tape = expr.compile_tape(ast)
        return obj

    def to_src(self):
        """Canonical printing; parsing it back gives the same AST."""
        return expr.to_src(self.ast)

    def __call__(self, x, y):
        t = self.tape
        v = kernel.eval_scalar(t.code, t.consts, t.n_regs, t.out_reg, x, y)
        if not math.isfinite(v):
            raise DomainError((x, y), "expression %r" % self.src)
        return v

    def eval_many(self, xs, ys, check=True):
        t = self.tape
        out = kernel.eval_batch(t.code, t.consts, t.n_regs, t.out_reg,
                                np.ascontiguousarray(xs, dtype=np.float64),
                                np.ascontiguousarray(ys, dtype=np.float64))
        if check and not np.all(np.isfinite(out)):
            i = int(np.argmin(np.isfinite(out)))
            raise DomainError((float(np.asarray(xs)[i]), float(np.asarray(ys)[i])),
                              "expression %r" % self.src)
        return out

    def derivative(self, x, y, dx, dy, strict=True):
        """Directional derivative along (dx, dy) by forward-mode duals."""
        t = self.tape
        v, dv, kink = kernel.eval_dual(
            t.code, t.consts, t.n_regs, t.out_reg, x, y, dx, dy
        )
        if strict and kink:
            raise NonDifferentiable((x, y))
        if not (math.isfinite(v) and math.isfinite(dv)):
            raise DomainError((x, y), "derivative of %r" % self.src)
        return v, dv

    def __repr__(self):
        return "ScalarField(%r)" % self.src


class VectorField:
    """Velocity field beta = (b1, b2), each component a ScalarField."""

    def __init__(self, b1, b2):
        self.b1 = b1
        self.b2 = b2

    def __call__(self, x, y):
        return self.b1(x, y), self.b2(x, y)

    def eval_many(self, xs, ys, check=True):
        return self.b1.eval_many(xs, ys, check), self.b2.eval_many(xs, ys, check)

    def speed(self, x, y):
        bx, by = self(x, y)
        return math.hypot(bx, by)

    def divergence(self, x, y, strict=True):
        _, d1 = self.b1.derivative(x, y, 1.0, 0.0, strict=strict)
        _, d2 = self.b2.derivative(x, y, 0.0, 1.0, strict=strict)
        return d1 + d2

    def __repr__(self):
        return "VectorField(%r, %r)" % (self.b1.src, self.b2.src)


def parse_field(src, params=None):
    """Parse an expression in x, y (with optional bound parameters) into a
    scalar field."""
    return ScalarField(src, params)


def parse_vector_field(src1, src2, params=None):
    return VectorField(ScalarField(src1, params), ScalarField(src2, params))


def constant_field(value):
    v = float(value)
    node = expr.Unary("-", expr.Num(-v)) if v < 0 else expr.Num(v)
    return ScalarField.from_ast(node)


def eval_field(field, points):
    """Evaluate a scalar field at an (n, 2) array of points."""
    pts = np.asarray(points, dtype=np.float64)
    return field.eval_many(pts[:, 0], pts[:, 1])


def divergence(beta, point):
    """div beta at one point, exact via duals; kinks raise."""
    return beta.divergence(point[0], point[1])


# --- essential sup/inf over the closed domain ------------------------------


def _boundary_distance_batch(domain, xs, ys):
    verts = domain.vertices
    n = domain.n_edges
    best = np.full(len(xs), np.inf)
    for i in range(n):
        j = (i + 1) % n
        ex = verts[j, 0] - verts[i, 0]
        ey = verts[j, 1] - verts[i, 1]
        L2 = ex * ex + ey * ey
        px = xs - verts[i, 0]
        py = ys - verts[i, 1]
        s = np.clip((px * ex + py * ey) / L2, 0.0, 1.0)
        d = np.hypot(px - s * ex, py - s * ey)
        np.minimum(best, d, out=best)
    return best


def domain_samples(domain, grid_n):
    """Lattice over the bounding box restricted to the closure, plus per-edge
    boundary samples (vertices included).  Lattices nest under doubling of
    grid_n, so grid extrema are monotone under refinement."""
    x0, y0, x1, y1 = domain.bbox
    gx = np.linspace(x0, x1, grid_n + 1)
    gy = np.linspace(y0, y1, grid_n + 1)
    X, Y = np.meshgrid(gx, gy)
    xs = X.ravel()
    ys = Y.ravel()
    inside = domain.contains_batch(xs, ys).astype(bool)
    near = _boundary_distance_batch(domain, xs, ys) <= max(domain.eps_geom, 1e-12)
    keep = inside | near
    xs, ys = xs[keep], ys[keep]
    bs = np.linspace(0.0, 1.0, grid_n + 1)
    bx = []
    by = []
    for e in range(domain.n_edges):
        p0 = domain.vertices[e]
        v = domain.vertices[(e + 1) % domain.n_edges] - p0
        bx.append(p0[0] + bs * v[0])
        by.append(p0[1] + bs * v[1])
    xs = np.concatenate([xs] + bx)
    ys = np.concatenate([ys] + by)
    return xs, ys


def grid_extremum(domain, func_batch, grid_n, mode="max", rounds=3):
    """Extremum of func over the closed domain: inclusive lattice plus
    boundary samples, then `rounds` rounds of 4x local refinement around the
    winning point.  Returns (value, Point2)."""
    xs, ys = domain_samples(domain, grid_n)
    vals = func_batch(xs, ys)
    if not np.all(np.isfinite(vals)):
        i = int(np.argmin(np.isfinite(vals)))
        raise DomainError((float(xs[i]), float(ys[i])))
    pick = np.argmax if mode == "max" else np.argmin
    i = int(pick(vals))
    best_v = float(vals[i])
    best_x, best_y = float(xs[i]), float(ys[i])
    x0, y0, x1, y1 = domain.bbox
    h = max(x1 - x0, y1 - y0) / max(grid_n, 1)
    for _ in range(rounds):
        gx = np.linspace(best_x - h, best_x + h, 9)
        gy = np.linspace(best_y - h, best_y + h, 9)
        X, Y = np.meshgrid(gx, gy)
        cx = X.ravel()
        cy = Y.ravel()
        inside = domain.contains_batch(cx, cy).astype(bool)
        near = _boundary_distance_batch(domain, cx, cy) <= domain.eps_geom
        keep = inside | near
        cx, cy = cx[keep], cy[keep]
        if len(cx) == 0:
            h /= 4.0
            continue
        vals = func_batch(cx, cy)
        if not np.all(np.isfinite(vals)):
            i = int(np.argmin(np.isfinite(vals)))
            raise DomainError((float(cx[i]), float(cy[i])))
        i = int(pick(vals))
        v = float(vals[i])
        if (mode == "max" and v > best_v) or (mode == "min" and v < best_v):
            best_v = v
            best_x, best_y = float(cx[i]), float(cy[i])
        h /= 4.0
    return best_v, Point2(best_x, best_y)


@dataclass
class FieldNorms:
    """Grid estimates of the field magnitudes entering the explicit
    constants.  `overrides` records entries supplied exactly by the user."""

    sup_beta: float
    sup_dbeta: float
    w1inf: float
    sup_mu: float
    ess_inf_mu: float
    inf_beta: float
    grid_n: int
    attained: dict = dc_field(default_factory=dict)
    overrides: dict = dc_field(default_factory=dict)

    def to_dict(self):
        return {
            "sup_beta": self.sup_beta,
            "sup_dbeta": self.sup_dbeta,
            "w1inf": self.w1inf,
            "sup_mu": self.sup_mu,
            "ess_inf_mu": self.ess_inf_mu,
            "inf_beta": self.inf_beta,
            "grid_n": self.grid_n,
            "overrides": dict(sorted(self.overrides.items())),
        }


def estimate_norms(beta, mu, domain, grid_n=32, rounds=3, overrides=None):
    """Estimate sup|beta|, the max-entry sup of D beta, the combined
    W^{1,inf} magnitude, sup mu and ess inf mu over the closed domain.

    Entries of `overrides` (e.g. an exact w1inf) replace the grid values and
    are recorded on the report.
    """
    overrides = dict(overrides or {})

    def speed(xs, ys):
        b1, b2 = beta.eval_many(xs, ys)
        return np.hypot(b1, b2)

    sup_beta, at_sb = grid_extremum(domain, speed, grid_n, "max", rounds)
    inf_beta, at_ib = grid_extremum(domain, speed, grid_n, "min", rounds)

    t1, t2 = beta.b1.tape, beta.b2.tape

    def dbeta(xs, ys):
        out = np.empty(len(xs))
        for i in range(len(xs)):
            x, y = float(xs[i]), float(ys[i])
            _, dxx, _ = kernel.eval_dual(t1.code, t1.consts, t1.n_regs,
                                         t1.out_reg, x, y, 1.0, 0.0)
            _, dxy, _ = kernel.eval_dual(t1.code, t1.consts, t1.n_regs,
                                         t1.out_reg, x, y, 0.0, 1.0)
            _, dyx, _ = kernel.eval_dual(t2.code, t2.consts, t2.n_regs,
                                         t2.out_reg, x, y, 1.0, 0.0)
            _, dyy, _ = kernel.eval_dual(t2.code, t2.consts, t2.n_regs,
                                         t2.out_reg, x, y, 0.0, 1.0)
            out[i] = max(abs(dxx), abs(dxy), abs(dyx), abs(dyy))
        return out

    sup_dbeta, at_db = grid_extremum(domain, dbeta, grid_n, "max", rounds)

    if mu is not None:
        sup_mu, at_sm = grid_extremum(
            domain, lambda xs, ys: np.abs(mu.eval_many(xs, ys)), grid_n,
            "max", rounds)
        ess_inf_mu, at_im = grid_extremum(
            domain, lambda xs, ys: mu.eval_many(xs, ys), grid_n, "min", rounds)
    else:
        sup_mu, ess_inf_mu = 0.0, 0.0
        at_sm = at_im = None

    values = {
        "sup_beta": sup_beta,
        "sup_dbeta": sup_dbeta,
        "sup_mu": sup_mu,
        "ess_inf_mu": ess_inf_mu,
        "inf_beta": inf_beta,
    }
    for key, val in overrides.items():
        if key not in values and key != "w1inf":
            raise ValueError("unknown norm override %r" % key)
        if key != "w1inf":
            values[key] = float(val)
    w1inf = max(values["sup_beta"], values["sup_dbeta"])
    if "w1inf" in overrides:
        w1inf = float(overrides["w1inf"])

    return FieldNorms(
        sup_beta=values["sup_beta"],
        sup_dbeta=values["sup_dbeta"],
        w1inf=w1inf,
        sup_mu=values["sup_mu"],
        ess_inf_mu=values["ess_inf_mu"],
        inf_beta=values["inf_beta"],
        grid_n=grid_n,
        attained={
            "sup_beta": at_sb, "sup_dbeta": at_db,
            "sup_mu": at_sm, "ess_inf_mu": at_im, "inf_beta": at_ib,
        },
        overrides=overrides,
    )

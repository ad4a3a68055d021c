"""Self-contained SVG rendering: classified boundaries and value heatmaps.

Everything is emitted inline (styles, colors, legend); the files open in any
browser with no external assets. World coordinates are mapped to screen
coordinates directly so text stays upright despite the y-axis flip.
"""
from __future__ import annotations

import numpy as np

from .characteristics import CHARACTERISTIC, INFLOW, OUTFLOW

LABEL_COLORS = {
    INFLOW: "#1f77b4",
    OUTFLOW: "#d62728",
    CHARACTERISTIC: "#7f7f7f",
}
LABEL_TEXT = {
    INFLOW: "inflow",
    OUTFLOW: "outflow",
    CHARACTERISTIC: "characteristic",
}

# compact viridis-style anchors, interpolated linearly in RGB
_CMAP = np.array([
    (68, 1, 84), (71, 44, 122), (59, 81, 139), (44, 113, 142),
    (33, 144, 141), (39, 173, 129), (92, 200, 99), (170, 220, 50),
    (253, 231, 37),
], dtype=float)


def _color(t):
    t = min(1.0, max(0.0, float(t)))
    x = t * (len(_CMAP) - 1)
    i = min(int(x), len(_CMAP) - 2)
    frac = x - i
    r, g, b = _CMAP[i] * (1 - frac) + _CMAP[i + 1] * frac
    return "#%02x%02x%02x" % (int(round(r)), int(round(g)), int(round(b)))


class _Canvas:
    """Accumulates SVG elements over a world-box to screen-box mapping."""

    def __init__(self, bbox, width=640, margin=48):
        xmin, ymin, xmax, ymax = bbox
        dx = max(xmax - xmin, 1e-30)
        dy = max(ymax - ymin, 1e-30)
        self.scale = (width - 2 * margin) / dx
        self.w = width
        self.h = int(round(dy * self.scale)) + 2 * margin
        self.margin = margin
        self.xmin, self.ymax = xmin, ymax
        self.parts = []

    def map(self, x, y):
        return (self.margin + (x - self.xmin) * self.scale,
                self.margin + (self.ymax - y) * self.scale)

    def path_points(self, pts):
        return " ".join("%.2f,%.2f" % self.map(x, y) for x, y in pts)

    def add(self, element):
        self.parts.append(element)

    def render(self, title=None):
        head = ('<svg xmlns="http://www.w3.org/2000/svg" '
                'viewBox="0 0 %d %d" width="%d" height="%d" '
                'font-family="sans-serif">' % (self.w, self.h, self.w, self.h))
        body = ['<rect width="%d" height="%d" fill="white"/>'
                % (self.w, self.h)]
        if title:
            body.append('<text x="%d" y="%d" font-size="14" fill="#222">'
                        '%s</text>' % (self.margin, self.margin - 18,
                                       _esc(title)))
        return head + "\n" + "\n".join(body + self.parts) + "\n</svg>\n"


def _esc(s):
    return (str(s).replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;"))


def _legend(cv, entries, x=None, y=None):
    x = cv.w - 170 if x is None else x
    y = cv.margin if y is None else y
    rows = ['<g font-size="12">']
    rows.append('<rect x="%d" y="%d" width="158" height="%d" fill="white" '
                'stroke="#999" rx="4"/>' % (x - 8, y - 14, 20 * len(entries) + 10))
    for i, (color, text, kind) in enumerate(entries):
        yy = y + 20 * i
        if kind == "line":
            rows.append('<line x1="%d" y1="%d" x2="%d" y2="%d" stroke="%s" '
                        'stroke-width="4"/>' % (x, yy, x + 26, yy, color))
        else:
            rows.append('<circle cx="%d" cy="%d" r="5" fill="%s" '
                        'stroke="black"/>' % (x + 13, yy, color))
        rows.append('<text x="%d" y="%d" fill="#222">%s</text>'
                    % (x + 34, yy + 4, _esc(text)))
    rows.append("</g>")
    return "\n".join(rows)


def classification_svg(domain, classification, engine=None,
                       n_characteristics=6, title=None, width=640):
    """Domain outline with boundary arcs colored by flow label, components
    where inflow and outflow closures meet marked, and (optionally) sample
    characteristics traced from the inflow part."""
    cv = _Canvas(domain.bbox, width=width)
    verts = [(float(p[0]), float(p[1])) for p in domain.vertices]
    cv.add('<polygon points="%s" fill="#f5f5f0" stroke="none"/>'
           % cv.path_points(verts))

    if engine is not None and n_characteristics > 0:
        cv.add('<g stroke="#2ca02c" stroke-width="1.2" fill="none" '
               'opacity="0.8">')
        for arc in classification.inflow_arcs():
            length = domain.arc_length(arc)
            n_here = max(1, int(round(
                n_characteristics * length / max(domain.diameter, 1e-30))))
            for k in range(n_here):
                s = arc.s0 + (arc.s1 - arc.s0) * (k + 0.5) / n_here
                p = domain.point_on(arc.edge, s)
                # nudge off the wall before tracing downstream
                b = engine.beta.eval_many(np.array([p[0]]), np.array([p[1]]),
                                          check=False)
                nb = float(np.hypot(b[0][0], b[1][0]))
                if nb < 1e-14:
                    continue
                eps = 1e-7 * domain.diameter / nb
                q = (p[0] + eps * b[0][0], p[1] + eps * b[1][0])
                if domain.contains(q).kind == "exterior":
                    continue
                try:
                    tr = engine.trace(q, direction=1)
                except Exception:
                    continue
                pts = [(sx, sy) for _, sx, sy in tr.samples]
                if len(pts) >= 2:
                    cv.add('<polyline points="%s"/>' % cv.path_points(pts))
        cv.add("</g>")

    for la in classification.arcs:
        a = la.arc
        if a.s1 - a.s0 <= 0:
            continue
        p0 = domain.point_on(a.edge, a.s0)
        p1 = domain.point_on(a.edge, a.s1)
        cv.add('<line x1="%.2f" y1="%.2f" x2="%.2f" y2="%.2f" stroke="%s" '
               'stroke-width="4" stroke-linecap="round"/>'
               % (*cv.map(*p0), *cv.map(*p1),
                  LABEL_COLORS.get(la.label, "#000")))

    for comp in classification.components:
        cx, cy = cv.map(comp.point[0], comp.point[1])
        cv.add('<circle cx="%.2f" cy="%.2f" r="6" fill="#ffdd44" '
               'stroke="black" stroke-width="1.5"/>' % (cx, cy))

    entries = [(LABEL_COLORS[lab], LABEL_TEXT[lab], "line")
               for lab in (INFLOW, OUTFLOW, CHARACTERISTIC)]
    if classification.components:
        entries.append(("#ffdd44", "closure meeting point", "dot"))
    if engine is not None and n_characteristics > 0:
        entries.append(("#2ca02c", "characteristic", "line"))
    cv.add(_legend(cv, entries))
    return cv.render(title=title)


def heatmap_svg(domain, values, title=None, width=640, grid_n=96,
                label="u"):
    """Cell heatmap of a scalar over the domain, clipped to the polygon.

    values: callable (x, y) -> float for points inside the domain, or a
    precomputed dict {"xs", "ys", "vals"} on an arbitrary scatter (cells take
    the nearest sample).
    """
    cv = _Canvas(domain.bbox, width=width)
    xmin, ymin, xmax, ymax = domain.bbox
    nx = grid_n
    ny = max(4, int(round(grid_n * (ymax - ymin) / max(xmax - xmin, 1e-30))))
    xs = np.linspace(xmin, xmax, nx + 1)
    ys = np.linspace(ymin, ymax, ny + 1)
    cxs = 0.5 * (xs[:-1] + xs[1:])
    cys = 0.5 * (ys[:-1] + ys[1:])

    scatter = None
    if isinstance(values, dict):
        scatter = (np.asarray(values["xs"]), np.asarray(values["ys"]),
                   np.asarray(values["vals"]))

    cells = []
    vals = []
    for j, cy in enumerate(cys):
        row_x = cxs
        inside = domain.contains_batch(row_x, np.full(nx, cy))
        for i, cx in enumerate(cxs):
            ok = bool(inside[i])
            px, py = cx, cy
            if not ok:
                # keep boundary cells: pull the sample point inward a touch
                for ddx, ddy in ((0.25, 0.25), (-0.25, 0.25),
                                 (0.25, -0.25), (-0.25, -0.25)):
                    qx = cx + ddx * (xs[i + 1] - xs[i])
                    qy = cy + ddy * (ys[j + 1] - ys[j])
                    if domain.contains((qx, qy)).kind != "exterior":
                        ok, px, py = True, qx, qy
                        break
            if not ok:
                continue
            if scatter is not None:
                sx, sy, sv = scatter
                k = int(np.argmin((sx - px) ** 2 + (sy - py) ** 2))
                v = float(sv[k])
            else:
                try:
                    v = float(values(px, py))
                except Exception:
                    continue
            if not np.isfinite(v):
                continue
            cells.append((i, j))
            vals.append(v)

    verts = [(float(p[0]), float(p[1])) for p in domain.vertices]
    clip_id = "domclip"
    cv.add('<defs><clipPath id="%s"><polygon points="%s"/></clipPath></defs>'
           % (clip_id, cv.path_points(verts)))
    if vals:
        vmin, vmax = min(vals), max(vals)
        span = vmax - vmin if vmax > vmin else 1.0
        cv.add('<g clip-path="url(#%s)" stroke="none">' % clip_id)
        for (i, j), v in zip(cells, vals):
            x0, y0 = cv.map(xs[i], ys[j + 1])
            x1, y1 = cv.map(xs[i + 1], ys[j])
            cv.add('<rect x="%.2f" y="%.2f" width="%.2f" height="%.2f" '
                   'fill="%s"/>' % (x0, y0, x1 - x0 + 0.5, y1 - y0 + 0.5,
                                    _color((v - vmin) / span)))
        cv.add("</g>")
    else:
        vmin = vmax = 0.0

    cv.add('<polygon points="%s" fill="none" stroke="black" '
           'stroke-width="1.5"/>' % cv.path_points(verts))

    # colorbar
    bar_x, bar_y, bar_w, bar_h = cv.w - 60, cv.margin, 18, cv.h - 2 * cv.margin
    nseg = 24
    for k in range(nseg):
        t0 = k / nseg
        cv.add('<rect x="%d" y="%.2f" width="%d" height="%.2f" fill="%s"/>'
               % (bar_x, bar_y + bar_h * (1 - (k + 1) / nseg), bar_w,
                  bar_h / nseg + 0.5, _color(t0 + 0.5 / nseg)))
    cv.add('<rect x="%d" y="%d" width="%d" height="%d" fill="none" '
           'stroke="#444"/>' % (bar_x, bar_y, bar_w, bar_h))
    cv.add('<text x="%d" y="%d" font-size="11" fill="#222">%.4g</text>'
           % (bar_x - 4, bar_y + bar_h + 14, vmin))
    cv.add('<text x="%d" y="%d" font-size="11" fill="#222">%.4g</text>'
           % (bar_x - 4, bar_y - 6, vmax))
    cv.add('<text x="%d" y="%d" font-size="12" fill="#222">%s</text>'
           % (bar_x, bar_y - 22, _esc(label)))
    return cv.render(title=title)


def write_svg(path, content):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(content)
    return path

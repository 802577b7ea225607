"""Minimal deterministic SVG writer for portrait figures."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

REGION_COLORS = {"D1": "#d95f02", "D2": "#1b9e77", "D3": "#7570b3",
                 "separatrix": "#000000", "toward_0": "#d95f02", "toward_pi/g": "#1b9e77"}
WALL_COLORS = ["#d95f02", "#1b9e77", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"]


def _n(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


class Canvas:
    """Maps a world box onto a square image with the y axis pointing up."""

    def __init__(self, xmin, xmax, ymin, ymax, size=480, margin=24):
        self.size, self.margin = size, margin
        span = max(xmax - xmin, ymax - ymin) or 1.0
        self.scale = (size - 2 * margin) / span
        self.x0, self.y0 = xmin, ymin
        self.items = []

    def px(self, p):
        x = self.margin + (p[0] - self.x0) * self.scale
        y = self.size - self.margin - (p[1] - self.y0) * self.scale
        return _n(x), _n(y)

    def _pts(self, pts):
        return " ".join(",".join(self.px(p)) for p in pts)

    def polyline(self, pts, stroke="#000", width=1.0, opacity=1.0):
        self.items.append(f'<polyline points="{self._pts(pts)}" fill="none" '
                          f'stroke="{stroke}" stroke-width="{_n(width)}" '
                          f'stroke-opacity="{_n(opacity)}"/>')

    def polygon(self, pts, fill="none", stroke="#000", width=1.0, opacity=1.0):
        self.items.append(f'<polygon points="{self._pts(pts)}" fill="{fill}" '
                          f'fill-opacity="{_n(opacity)}" stroke="{stroke}" '
                          f'stroke-width="{_n(width)}"/>')

    def circle(self, p, r=3.0, fill="#000"):
        x, y = self.px(p)
        self.items.append(f'<circle cx="{x}" cy="{y}" r="{_n(r)}" fill="{fill}"/>')

    def text(self, p, s, size=12):
        x, y = self.px(p)
        self.items.append(f'<text x="{x}" y="{y}" font-size="{size}" '
                          f'font-family="sans-serif">{escape(s)}</text>')

    def render(self, title="") -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.size}" '
                f'height="{self.size}" viewBox="0 0 {self.size} {self.size}">\n')
        body = []
        if title:
            body.append(f"<title>{escape(title)}</title>")
        body.append(f'<rect width="{self.size}" height="{self.size}" fill="#ffffff"/>')
        body.extend(self.items)
        return head + "\n".join(body) + "\n</svg>\n"


def rank2_svg(portrait: dict, euclidean_lines, title="") -> str:
    """Chamber sector, unit arc split at p0, and Euclidean flow lines."""
    g = portrait["g"]
    top = math.pi / g
    cv = Canvas(-0.05, 1.05, -0.05, 1.05)
    cv.polyline([(0, 0), (1.1, 0)], stroke="#888")
    cv.polyline([(0, 0), (1.1 * math.cos(top), 1.1 * math.sin(top))], stroke="#888")
    tg = portrait["theta_g"]
    for (a, b), key in (((0.0, tg), "toward_0"), ((tg, top), "toward_pi/g")):
        arc = [(math.cos(s), math.sin(s)) for s in np.linspace(a, b, 64)]
        cv.polyline(arc, stroke=REGION_COLORS[key], width=3)
    for line in euclidean_lines:
        cv.polyline(line["x"], stroke=REGION_COLORS[line["branch"]], width=1, opacity=0.8)
    cv.circle(portrait["p0"], 4, "#000")
    cv.text((portrait["p0"][0] + 0.03, portrait["p0"][1]), "p0")
    return cv.render(title)


def a3_svg(pt, flow_lines=(), title="") -> str:
    """Gnomonic chart of the A3 spherical chamber triangle at p0."""
    verts = pt.to_chart(pt.vertices)
    lo, hi = verts.min(axis=0), verts.max(axis=0)
    pad = 0.05 * float(np.max(hi - lo))
    cv = Canvas(lo[0] - pad, hi[0] + pad, lo[1] - pad, hi[1] + pad)
    if pt.labels is not None:
        for (u, v), lab in zip(pt.to_chart(pt.starts), pt.labels):
            cv.circle((u, v), 2.0, REGION_COLORS.get(lab, "#999999"))
    for line in flow_lines:
        cv.polyline(pt.to_chart(line), stroke="#555555", width=0.6, opacity=0.7)
    cv.polygon(verts, stroke="#000", width=1.5)
    for s in pt.separatrices:
        cv.polyline(pt.to_chart(s), stroke="#000", width=2)
    for i, p in enumerate(verts):
        cv.circle(p, 3.5, "#000")
        cv.text(p, f"p{i + 1}")
    cv.circle((0.0, 0.0), 4.5, "#c00")
    cv.text((0.0, 0.0), "p0")
    return cv.render(title)

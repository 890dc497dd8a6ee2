"""Dependency-free SVG rendering of sweep and pipeline CSV output.

Three kinds of figure:

* ``curves``: measures against p, with the Werner onsets of entanglement,
  steering and nonlocality drawn as dashed verticals;
* ``heatmap``: the hierarchy parameter H over the (p, q) plane;
* ``scatter``: S3 against S and B' against B, with the exact monotone
  relations between them and the diagonal for reference.
"""

from __future__ import annotations

import csv
import io
import math
from xml.sax.saxutils import escape

from .measures import bprime_from_b, s3_from_s

KINDS = ("curves", "heatmap", "scatter")
WERNER_ONSETS = (1.0 / 3.0, 1.0 / math.sqrt(3.0), 1.0 / math.sqrt(2.0))
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")
H_COLORS = ("#f7f7f7", "#c6dbef", "#6baed6", "#08519c")

WIDTH, HEIGHT = 640, 480
MARGIN = 60


class MalformedCSVError(ValueError):
    pass


def read_table(text: str) -> tuple[list[str], list[dict]]:
    """Parse a numeric CSV into (header, rows).  Empty input gives ([], [])."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if not rows:
        return [], []
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        raise MalformedCSVError("duplicate column names")
    out = []
    for k, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise MalformedCSVError(f"line {k}: expected {len(header)} fields, got {len(row)}")
        try:
            out.append({h: float(x) for h, x in zip(header, row)})
        except ValueError as exc:
            raise MalformedCSVError(f"line {k}: {exc}") from None
    return header, out


def _f(x: float) -> str:
    return f"{x:.2f}"


class _Axes:
    def __init__(self, x0, y0, w, h, xlim=(0.0, 1.0), ylim=(0.0, 1.0)):
        self.x0, self.y0, self.w, self.h = x0, y0, w, h
        self.xlim, self.ylim = xlim, ylim

    def x(self, v):
        lo, hi = self.xlim
        return self.x0 + (v - lo) / (hi - lo) * self.w

    def y(self, v):
        lo, hi = self.ylim
        return self.y0 + self.h - (v - lo) / (hi - lo) * self.h

    def frame(self, xlabel, ylabel, ticks=5) -> list[str]:
        out = [f'<rect x="{_f(self.x0)}" y="{_f(self.y0)}" width="{_f(self.w)}" height="{_f(self.h)}" '
               'fill="none" stroke="black"/>']
        for k in range(ticks + 1):
            xv = self.xlim[0] + k * (self.xlim[1] - self.xlim[0]) / ticks
            yv = self.ylim[0] + k * (self.ylim[1] - self.ylim[0]) / ticks
            px, py = self.x(xv), self.y(yv)
            bottom = self.y0 + self.h
            out.append(f'<line x1="{_f(px)}" y1="{_f(bottom)}" x2="{_f(px)}" y2="{_f(bottom + 5)}" stroke="black"/>')
            out.append(f'<text x="{_f(px)}" y="{_f(bottom + 18)}" font-size="11" text-anchor="middle">{xv:.2g}</text>')
            out.append(f'<line x1="{_f(self.x0 - 5)}" y1="{_f(py)}" x2="{_f(self.x0)}" y2="{_f(py)}" stroke="black"/>')
            out.append(f'<text x="{_f(self.x0 - 8)}" y="{_f(py + 4)}" font-size="11" text-anchor="end">{yv:.2g}</text>')
        out.append(f'<text x="{_f(self.x0 + self.w / 2)}" y="{_f(self.y0 + self.h + 38)}" font-size="13" '
                   f'text-anchor="middle">{escape(xlabel)}</text>')
        out.append(f'<text x="{_f(self.x0 - 42)}" y="{_f(self.y0 + self.h / 2)}" font-size="13" text-anchor="middle" '
                   f'transform="rotate(-90 {_f(self.x0 - 42)} {_f(self.y0 + self.h / 2)})">{escape(ylabel)}</text>')
        return out

    def polyline(self, xs, ys, color, dash=None, width=1.5) -> str:
        pts = " ".join(f"{_f(self.x(a))},{_f(self.y(b))}" for a, b in zip(xs, ys))
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        return f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{width}"{extra}/>'

    def marker(self, xv, yv, color) -> str:
        return f'<circle cx="{_f(self.x(xv))}" cy="{_f(self.y(yv))}" r="3" fill="{color}"/>'


def _document(body: list[str], title: str) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">')
    return "\n".join([head, f"<title>{escape(title)}</title>",
                      f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>', *body, "</svg>"]) + "\n"


_SUFFIXES = ("_plus", "_minus", "_theory")


def _measure_columns(header):
    return [h for h in header if h not in ("p", "q") and not h.endswith(_SUFFIXES)]


def _ylim(rows, cols):
    hi = 1.0
    for r in rows:
        for c in cols:
            hi = max(hi, r[c] + r.get(f"{c}_plus", 0.0))
    return (0.0, hi)


def plot_curves(header, rows) -> str:
    cols = _measure_columns(header)
    if rows and "q" in header:
        q0 = rows[0]["q"]
        rows = [r for r in rows if r["q"] == q0]
    ax = _Axes(MARGIN + 10, 30, WIDTH - 2 * MARGIN - 90, HEIGHT - 100, ylim=_ylim(rows, cols))
    body = ax.frame("p", "measure")
    for onset in WERNER_ONSETS:
        body.append(ax.polyline([onset, onset], list(ax.ylim), "#777777", dash="4,3", width=1))
    rows = sorted(rows, key=lambda r: r["p"]) if rows and "p" in header else rows
    for k, c in enumerate(cols):
        color = PALETTE[k % len(PALETTE)]
        xs = [r["p"] for r in rows]
        ys = [r[c] for r in rows]
        has_bars = f"{c}_plus" in header and f"{c}_minus" in header
        if f"{c}_theory" in header:
            body.append(ax.polyline(xs, [r[f"{c}_theory"] for r in rows], color, width=1.2))
        if has_bars:
            for r in rows:
                lo, hi = r[c] - r[f"{c}_minus"], r[c] + r[f"{c}_plus"]
                body.append(ax.polyline([r["p"], r["p"]], [lo, hi], color, width=1))
                body.append(ax.marker(r["p"], r[c], color))
        elif xs:
            body.append(ax.polyline(xs, ys, color))
        ly = 40 + 18 * k
        lx = ax.x0 + ax.w + 12
        body.append(f'<line x1="{_f(lx)}" y1="{ly}" x2="{_f(lx + 18)}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        body.append(f'<text x="{_f(lx + 22)}" y="{ly + 4}" font-size="11">{escape(c)}</text>')
    return _document(body, "measures versus p")


def plot_heatmap(header, rows, column: str = "hierarchy_H") -> str:
    ax = _Axes(MARGIN + 10, 30, WIDTH - 2 * MARGIN - 90, HEIGHT - 100)
    body = []
    if rows:
        for need in ("p", "q", column):
            if need not in header:
                raise MalformedCSVError(f"heatmap needs a {need!r} column")
        ps = sorted({r["p"] for r in rows})
        qs = sorted({r["q"] for r in rows})
        ax.xlim = (ps[0], ps[-1]) if ps[-1] > ps[0] else (ps[0] - 0.5, ps[0] + 0.5)
        ax.ylim = (qs[0], qs[-1]) if qs[-1] > qs[0] else (qs[0] - 0.5, qs[0] + 0.5)
        dp = (ax.xlim[1] - ax.xlim[0]) / max(len(ps) - 1, 1)
        dq = (ax.ylim[1] - ax.ylim[0]) / max(len(qs) - 1, 1)
        for r in rows:
            level = int(round(r[column]))
            color = H_COLORS[min(max(level, 0), len(H_COLORS) - 1)]
            x0 = ax.x(max(r["p"] - dp / 2, ax.xlim[0]))
            x1 = ax.x(min(r["p"] + dp / 2, ax.xlim[1]))
            y0 = ax.y(min(r["q"] + dq / 2, ax.ylim[1]))
            y1 = ax.y(max(r["q"] - dq / 2, ax.ylim[0]))
            body.append(f'<rect x="{_f(x0)}" y="{_f(y0)}" width="{_f(x1 - x0)}" height="{_f(y1 - y0)}" '
                        f'fill="{color}" stroke="none"/>')
    body += ax.frame("p", "q")
    for level, color in enumerate(H_COLORS):
        ly = 40 + 20 * level
        lx = ax.x0 + ax.w + 12
        body.append(f'<rect x="{_f(lx)}" y="{ly - 8}" width="14" height="14" fill="{color}" stroke="black"/>')
        body.append(f'<text x="{_f(lx + 20)}" y="{ly + 4}" font-size="11">H = {level}</text>')
    return _document(body, f"{column} over (p, q)")


def plot_scatter(header, rows) -> str:
    half = (WIDTH - 3 * MARGIN) / 2
    panels = (
        (_Axes(MARGIN, 30, half, HEIGHT - 100), "steering_S", "steering_S3", s3_from_s, "S", "S3"),
        (_Axes(2 * MARGIN + half, 30, half, HEIGHT - 100), "bell_B", "bell_Bprime", bprime_from_b, "B", "B'"),
    )
    grid = [k / 100 for k in range(101)]
    body = []
    for ax, xc, yc, relation, xl, yl in panels:
        body += ax.frame(xl, yl)
        body.append(ax.polyline([0, 1], [0, 1], "#999999", dash="5,4", width=1))
        body.append(ax.polyline(grid, [relation(v) for v in grid], "#333333", dash="2,2", width=1.2))
        if not rows:
            continue
        if yc not in header and yc == "bell_Bprime" and "steering_S2" in header:
            yc = "steering_S2"
        if xc not in header or yc not in header:
            raise MalformedCSVError(f"scatter needs {xc!r} and {yc!r} columns")
        for r in rows:
            body.append(ax.marker(r[xc], r[yc], "#d62728"))
    return _document(body, "S3 vs S and B' vs B")


def render(text: str, kind: str) -> str:
    if kind not in KINDS:
        raise ValueError(f"unknown plot kind {kind!r}; choose from {KINDS}")
    header, rows = read_table(text)
    if kind == "curves":
        if rows and "p" not in header:
            raise MalformedCSVError("curves need a 'p' column")
        return plot_curves(header, rows)
    if kind == "heatmap":
        return plot_heatmap(header, rows)
    return plot_scatter(header, rows)

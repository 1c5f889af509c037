"""Minimal static SVG charts: line plots with dashed threshold rules and a
categorical region map. No plotting library involved."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 720, 440
MARGIN = dict(left=70, right=190, top=40, bottom=55)
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#e377c2", "#7f7f7f", "#17becf", "#bcbd22")
REGION_COLORS = {
    "safety-infeasible": "#f4a6a6",
    "feasible": "#a6d8a6",
    "queue-limited": "#f7d58b",
}


class Axes:
    """Maps data coordinates onto the plot area."""

    def __init__(self, xlim, ylim, width=WIDTH, height=HEIGHT):
        self.xlim, self.ylim = xlim, ylim
        self.x0 = MARGIN["left"]
        self.x1 = width - MARGIN["right"]
        self.y0 = height - MARGIN["bottom"]
        self.y1 = MARGIN["top"]

    def px(self, x):
        a, b = self.xlim
        return self.x0 + (x - a) / (b - a) * (self.x1 - self.x0)

    def py(self, y):
        a, b = self.ylim
        return self.y0 - (y - a) / (b - a) * (self.y0 - self.y1)


def _fmt(v):
    return f"{v:.2f}"


def _frame(ax, title, xlabel, ylabel, nticks=5):
    out = [
        f'<rect x="{ax.x0}" y="{ax.y1}" width="{ax.x1 - ax.x0}" height="{ax.y0 - ax.y1}" '
        'fill="none" stroke="#333"/>',
        f'<text x="{(ax.x0 + ax.x1) / 2:.1f}" y="22" text-anchor="middle" '
        f'font-size="15">{escape(title)}</text>',
        f'<text x="{(ax.x0 + ax.x1) / 2:.1f}" y="{ax.y0 + 42}" text-anchor="middle" '
        f'font-size="13">{escape(xlabel)}</text>',
        f'<text x="18" y="{(ax.y0 + ax.y1) / 2:.1f}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 18 {(ax.y0 + ax.y1) / 2:.1f})">{escape(ylabel)}</text>',
    ]
    for i in range(nticks + 1):
        xv = ax.xlim[0] + i * (ax.xlim[1] - ax.xlim[0]) / nticks
        yv = ax.ylim[0] + i * (ax.ylim[1] - ax.ylim[0]) / nticks
        out.append(f'<text x="{_fmt(ax.px(xv))}" y="{ax.y0 + 18}" text-anchor="middle" '
                   f'font-size="11">{xv:.3g}</text>')
        out.append(f'<text x="{ax.x0 - 8}" y="{_fmt(ax.py(yv) + 4)}" text-anchor="end" '
                   f'font-size="11">{yv:.3g}</text>')
    return out


def _document(body, width=WIDTH, height=HEIGHT):
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" '
            f'height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif">')
    return "\n".join([head, f'<rect width="{width}" height="{height}" fill="white"/>', *body, "</svg>"]) + "\n"


def _polyline(ax, xs, ys, color, name):
    pts, runs = [], []
    for x, y in zip(xs, ys):
        if y is None or not math.isfinite(y):
            if pts:
                runs.append(pts)
            pts = []
            continue
        pts.append(f"{_fmt(ax.px(x))},{_fmt(ax.py(y))}")
    if pts:
        runs.append(pts)
    return [f'<polyline class="series" data-name="{escape(name)}" fill="none" stroke="{color}" '
            f'stroke-width="2" points="{" ".join(p)}"/>' for p in runs]


def threshold_rule(ax, x, label):
    """Dashed vertical rule at data coordinate ``x``; the data value is kept
    in ``data-x`` so the drawing can be checked against the CSV."""
    X = _fmt(ax.px(x))
    return [
        f'<line class="threshold" data-x="{x:.6f}" x1="{X}" x2="{X}" y1="{ax.y1}" y2="{ax.y0}" '
        'stroke="black" stroke-width="1.5" stroke-dasharray="6,4"/>',
        f'<text x="{X}" y="{ax.y1 - 6}" text-anchor="middle" font-size="12">{escape(label)}</text>',
    ]


def line_chart(x, series, title, xlabel, ylabel, thresholds=(), ylim=(0.0, 1.0)):
    """``series`` is an ordered list of ``(name, values)``; ``thresholds`` a
    list of ``(x, label)`` dashed vertical rules."""
    ax = Axes((min(x), max(x)), ylim)
    body = _frame(ax, title, xlabel, ylabel)
    for i, (name, ys) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        body += _polyline(ax, x, ys, color, name)
        ly = ax.y1 + 14 + 18 * i
        body.append(f'<line x1="{ax.x1 + 12}" x2="{ax.x1 + 36}" y1="{ly}" y2="{ly}" '
                    f'stroke="{color}" stroke-width="2"/>')
        body.append(f'<text x="{ax.x1 + 42}" y="{ly + 4}" font-size="12">{escape(name)}</text>')
    for tx, label in thresholds:
        if ax.xlim[0] <= tx <= ax.xlim[1]:
            body += threshold_rule(ax, tx, label)
    return _document(body)


def region_map(deltas, rhos, labels, title, curve=None, delta_safe=None):
    """Cell-colored map over a (delta, rho) grid.

    ``labels[i][j]`` is the region at ``(deltas[i], rhos[j])``; ``curve`` is
    an optional ``(xs, ys)`` polyline drawn dashed (the stability line).
    """
    ax = Axes((min(deltas), max(deltas)), (min(rhos), max(rhos)))
    body = _frame(ax, title, "duty cycle delta", "activity factor rho")
    dx = (ax.px(deltas[-1]) - ax.px(deltas[0])) / max(len(deltas) - 1, 1)
    dy = (ax.py(rhos[0]) - ax.py(rhos[-1])) / max(len(rhos) - 1, 1)
    for i, d in enumerate(deltas):
        for j, r in enumerate(rhos):
            lab = labels[i][j]
            cx = max(ax.x0, ax.px(d) - dx / 2)
            cy = max(ax.y1, ax.py(r) - dy / 2)
            w = min(ax.x1, ax.px(d) + dx / 2) - cx
            h = min(ax.y0, ax.py(r) + dy / 2) - cy
            body.append(f'<rect class="cell" data-region="{lab}" x="{_fmt(cx)}" y="{_fmt(cy)}" '
                        f'width="{_fmt(w)}" height="{_fmt(h)}" fill="{REGION_COLORS[lab]}"/>')
    if curve is not None:
        xs, ys = curve
        pts = [(x, y) for x, y in zip(xs, ys) if ax.ylim[0] <= y <= ax.ylim[1]]
        if pts:
            body.append('<polyline class="stability" fill="none" stroke="black" stroke-width="2" '
                        'stroke-dasharray="6,4" points="'
                        + " ".join(f"{_fmt(ax.px(x))},{_fmt(ax.py(y))}" for x, y in pts) + '"/>')
    if delta_safe is not None and ax.xlim[0] <= delta_safe <= ax.xlim[1]:
        body += threshold_rule(ax, delta_safe, "delta_safe")
    for i, (lab, color) in enumerate(REGION_COLORS.items()):
        ly = ax.y1 + 14 + 18 * i
        body.append(f'<rect x="{ax.x1 + 12}" y="{ly - 8}" width="24" height="12" fill="{color}"/>')
        body.append(f'<text x="{ax.x1 + 42}" y="{ly + 3}" font-size="12">{lab}</text>')
    return _document(body)

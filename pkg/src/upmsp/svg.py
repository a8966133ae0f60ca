"""Minimal static SVG line charts with logarithmic axes."""

import math
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def _fmt(x):
    return f"{x:.2f}"


def _decades(lo, hi):
    return list(range(math.floor(math.log10(lo)), math.ceil(math.log10(hi)) + 1))


class LogLogChart:
    """A log-log chart with one polyline per series.

    Points with non-positive coordinates are dropped (they have no place
    on a log axis). The data of every series is embedded as a comment
    table so the file can be audited without re-running anything.
    """

    def __init__(self, title, xlabel, ylabel, width=640, height=420):
        self.title = title
        self.xlabel = xlabel
        self.ylabel = ylabel
        self.width = width
        self.height = height
        self.series = []

    def add_series(self, name, xs, ys):
        pts = [(x, y) for x, y in zip(xs, ys) if x > 0 and y > 0]
        self.series.append((name, pts))

    def render(self):
        left, right, top, bottom = 70, 150, 40, 55
        w = self.width - left - right
        h = self.height - top - bottom
        pts = [p for _, s in self.series for p in s]
        if pts:
            xlo = min(x for x, _ in pts)
            xhi = max(x for x, _ in pts)
            ylo = min(y for _, y in pts)
            yhi = max(y for _, y in pts)
        else:
            xlo, xhi, ylo, yhi = 1e-3, 1.0, 1e-3, 1.0
        xd = _decades(xlo, xhi)
        yd = _decades(ylo, yhi)
        if len(xd) < 2:
            xd = [xd[0], xd[0] + 1]
        if len(yd) < 2:
            yd = [yd[0], yd[0] + 1]
        x0, x1 = xd[0], xd[-1]
        y0, y1 = yd[0], yd[-1]

        def px(x):
            return left + (math.log10(x) - x0) / (x1 - x0) * w

        def py(y):
            return top + h - (math.log10(y) - y0) / (y1 - y0) * h

        out = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
            f'height="{self.height}" viewBox="0 0 {self.width} {self.height}" '
            'font-family="sans-serif" font-size="11">',
        ]
        for name, s in self.series:
            out.append(f"<!-- series {escape(name)}: x y")
            out.extend(f"     {x!r} {y!r}" for x, y in s)
            out.append("-->")
        out.append(f'<rect x="0" y="0" width="{self.width}" height="{self.height}" '
                   'fill="white"/>')
        out.append(f'<text x="{left + w / 2:.2f}" y="22" text-anchor="middle" '
                   f'font-size="14">{escape(self.title)}</text>')
        for d in xd:
            x = px(10.0 ** d)
            out.append(f'<line x1="{_fmt(x)}" y1="{top}" x2="{_fmt(x)}" '
                       f'y2="{top + h}" stroke="#dddddd"/>')
            out.append(f'<text x="{_fmt(x)}" y="{top + h + 16}" '
                       f'text-anchor="middle">1e{d}</text>')
        for d in yd:
            y = py(10.0 ** d)
            out.append(f'<line x1="{left}" y1="{_fmt(y)}" x2="{left + w}" '
                       f'y2="{_fmt(y)}" stroke="#dddddd"/>')
            out.append(f'<text x="{left - 6}" y="{_fmt(y + 4)}" '
                       f'text-anchor="end">1e{d}</text>')
        out.append(f'<rect x="{left}" y="{top}" width="{w}" height="{h}" '
                   'fill="none" stroke="black"/>')
        out.append(f'<text x="{left + w / 2:.2f}" y="{self.height - 12}" '
                   f'text-anchor="middle">{escape(self.xlabel)}</text>')
        out.append(f'<text x="16" y="{top + h / 2:.2f}" text-anchor="middle" '
                   f'transform="rotate(-90 16 {top + h / 2:.2f})">'
                   f'{escape(self.ylabel)}</text>')
        for idx, (name, s) in enumerate(self.series):
            color = PALETTE[idx % len(PALETTE)]
            if s:
                coords = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in s)
                out.append(f'<polyline fill="none" stroke="{color}" '
                           f'stroke-width="1.5" points="{coords}"/>')
            ly = top + 14 + 16 * idx
            out.append(f'<line x1="{left + w + 12}" y1="{ly - 4}" '
                       f'x2="{left + w + 32}" y2="{ly - 4}" stroke="{color}" '
                       'stroke-width="2"/>')
            out.append(f'<text x="{left + w + 38}" y="{ly}">{escape(name)}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"

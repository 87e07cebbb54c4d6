"""Minimal SVG emission: paths, polygons, circles, and text only.

Charts are static report figures, so a tiny deterministic writer beats a
plotting dependency. All numbers are formatted with a fixed precision to
keep rerun output byte-identical.
"""
from __future__ import annotations

import math
from pathlib import Path

from ..errors import IoFailure

PALETTE = ("#1b6ca8", "#d1495b", "#66a182", "#edae49", "#755fa5",
           "#2e4057", "#8c5e58", "#3a7d44")


def _fmt(x: float) -> str:
    return f"{float(x):.2f}"


def _esc(s: str) -> str:
    return (s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            .replace('"', "&quot;"))


def polyline(points, color: str, width: float = 1.5, dash: str = "") -> str:
    pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in points)
    dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
    return (f'<polyline points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="{_fmt(width)}"{dash_attr}/>')


def polygon(points, color: str, opacity: float = 0.25) -> str:
    pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in points)
    return (f'<polygon points="{pts}" fill="{color}" '
            f'fill-opacity="{_fmt(opacity)}" stroke="{color}" '
            f'stroke-width="1.50"/>')


def line(x1, y1, x2, y2, color: str = "#888888", width: float = 1.0) -> str:
    return (f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" '
            f'y2="{_fmt(y2)}" stroke="{color}" stroke-width="{_fmt(width)}"/>')


def circle(x, y, r: float, color: str) -> str:
    return f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(r)}" fill="{color}"/>'


def text(x, y, s: str, size: int = 12, color: str = "#222222",
         anchor: str = "start") -> str:
    return (f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-size="{size}" '
            f'font-family="sans-serif" fill="{color}" '
            f'text-anchor="{anchor}">{_esc(s)}</text>')


def save_svg(path, elements, width: int = 640, height: int = 420) -> None:
    body = "\n".join(elements)
    doc = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
           f'height="{height}" viewBox="0 0 {width} {height}">\n'
           f'<rect width="{width}" height="{height}" fill="#ffffff"/>\n'
           f"{body}\n</svg>\n")
    try:
        Path(path).write_text(doc, encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def legend(entries, x: float, y: float) -> list[str]:
    """Colored swatch + label per series, stacked vertically."""
    out = []
    for k, (label, color) in enumerate(entries):
        yk = y + 16 * k
        out.append(line(x, yk - 4, x + 18, yk - 4, color=color, width=3.0))
        out.append(text(x + 24, yk, label, size=11))
    return out


def _axis_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / (n - 1)
    return [lo + step * k for k in range(n)]


def xy_chart(series, width=640, height=420, title="", x_label="", y_label="",
             error_bars=None) -> list[str]:
    """Line chart with shared axes.

    `series` is a list of (label, xs, ys); `error_bars` optionally maps a
    label to per-point half-widths drawn as vertical bars.
    """
    left, right, top, bottom = 70, 20, 40, 50
    pw, ph = width - left - right, height - top - bottom
    all_x = [x for _, xs, _ in series for x in xs]
    all_y = [y for _, _, ys in series for y in ys]
    if error_bars:
        for label, xs, ys in series:
            for y, e in zip(ys, error_bars.get(label, [0.0] * len(ys))):
                all_y.extend([y - e, y + e])
    x_lo, x_hi = min(all_x), max(all_x)
    y_lo, y_hi = min(all_y), max(all_y)
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    def sx(x):
        return left + (x - x_lo) / (x_hi - x_lo) * pw

    def sy(y):
        return top + ph - (y - y_lo) / (y_hi - y_lo) * ph

    parts = [text(width / 2, 22, title, size=14, anchor="middle"),
             line(left, top, left, top + ph),
             line(left, top + ph, left + pw, top + ph)]
    for tx in _axis_ticks(x_lo, x_hi):
        parts.append(line(sx(tx), top + ph, sx(tx), top + ph + 4))
        parts.append(text(sx(tx), top + ph + 18, f"{tx:.4g}", size=10,
                          anchor="middle"))
    for ty in _axis_ticks(y_lo, y_hi):
        parts.append(line(left - 4, sy(ty), left, sy(ty)))
        parts.append(text(left - 8, sy(ty) + 4, f"{ty:.4g}", size=10,
                          anchor="end"))
    parts.append(text(left + pw / 2, height - 12, x_label, size=11,
                      anchor="middle"))
    parts.append(text(16, top - 10, y_label, size=11))
    entries = []
    for k, (label, xs, ys) in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        entries.append((label, color))
        pts = [(sx(x), sy(y)) for x, y in zip(xs, ys)]
        parts.append(polyline(pts, color))
        if error_bars and label in error_bars:
            for (x, y), e in zip(zip(xs, ys), error_bars[label]):
                parts.append(line(sx(x), sy(y - e), sx(x), sy(y + e),
                                  color=color, width=1.0))
        for x, y in zip(xs, ys):
            parts.append(circle(sx(x), sy(y), 2.5, color))
    parts.extend(legend(entries, left + 10, top + 14))
    return parts


def radar_chart(axes, series, width=520, height=460, title="") -> list[str]:
    """Radar plot: one polygon per series over the named axes.

    Values are min-max normalized per axis across all series (0 = center).
    """
    cx, cy, radius = width / 2, height / 2 + 10, min(width, height) / 2 - 80
    n = len(axes)
    angles = [2 * math.pi * k / n - math.pi / 2 for k in range(n)]
    cols = list(zip(*[vals for _, vals in series]))
    lo = [min(c) for c in cols]
    hi = [max(c) for c in cols]

    def norm(k, v):
        span = hi[k] - lo[k]
        return 0.5 if span <= 0 else (v - lo[k]) / span

    parts = [text(width / 2, 22, title, size=14, anchor="middle")]
    for ring in (0.25, 0.5, 0.75, 1.0):
        pts = [(cx + radius * ring * math.cos(a),
                cy + radius * ring * math.sin(a)) for a in angles]
        parts.append(polyline(pts + pts[:1], "#cccccc", width=0.8))
    for k, a in enumerate(angles):
        parts.append(line(cx, cy, cx + radius * math.cos(a),
                          cy + radius * math.sin(a), color="#cccccc"))
        lx = cx + (radius + 14) * math.cos(a)
        ly = cy + (radius + 14) * math.sin(a)
        anchor = "middle" if abs(math.cos(a)) < 0.3 else (
            "start" if math.cos(a) > 0 else "end")
        parts.append(text(lx, ly, axes[k], size=11, anchor=anchor))
    entries = []
    for s, (label, vals) in enumerate(series):
        color = PALETTE[s % len(PALETTE)]
        entries.append((label, color))
        pts = [(cx + radius * (0.1 + 0.9 * norm(k, v)) * math.cos(a),
                cy + radius * (0.1 + 0.9 * norm(k, v)) * math.sin(a))
               for k, (v, a) in enumerate(zip(vals, angles))]
        parts.append(polygon(pts, color))
    parts.extend(legend(entries, 16, 40))
    return parts

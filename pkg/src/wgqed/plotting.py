"""Minimal standalone SVG line plots and heatmaps."""

from __future__ import annotations

import json
from html import escape
from pathlib import Path

import numpy as np

__all__ = ["render_plot", "line_plot", "heatmap", "max_pool"]

_W, _H = 640, 480
_LEFT, _RIGHT, _TOP, _BOTTOM = 70, 20, 40, 55
_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"]
# viridis anchors
_CMAP = np.array([[68, 1, 84], [59, 82, 139], [33, 145, 140], [94, 201, 98], [253, 231, 37]],
                 dtype=float)


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def _ticks(lo: float, hi: float, n: int = 5) -> np.ndarray:
    if hi == lo:
        return np.array([lo])
    return np.linspace(lo, hi, n)


def _header(title: str, provenance) -> list:
    prov = json.dumps(provenance or {}, sort_keys=True, default=str).replace("--", "- -")
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f"<!-- provenance: {prov} -->",
        '<rect width="100%" height="100%" fill="white"/>',
        f'<text x="{_W / 2}" y="22" text-anchor="middle" font-family="sans-serif" '
        f'font-size="15">{escape(title)}</text>',
    ]


def _axes(xr, yr, xlabel, ylabel, box=None) -> list:
    x0, x1, y0, y1 = box or (_LEFT, _W - _RIGHT, _H - _BOTTOM, _TOP)
    out = [f'<g class="axes" stroke="black" fill="none">'
           f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/>'
           f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/></g>']
    for v in _ticks(*xr):
        px = x0 + (v - xr[0]) / ((xr[1] - xr[0]) or 1) * (x1 - x0)
        out.append(f'<line x1="{px:.2f}" y1="{y0}" x2="{px:.2f}" y2="{y0 + 5}" stroke="black"/>'
                   f'<text x="{px:.2f}" y="{y0 + 18}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="11">{_fmt(v)}</text>')
    for v in _ticks(*yr):
        py = y0 - (v - yr[0]) / ((yr[1] - yr[0]) or 1) * (y0 - y1)
        out.append(f'<line x1="{x0 - 5}" y1="{py:.2f}" x2="{x0}" y2="{py:.2f}" stroke="black"/>'
                   f'<text x="{x0 - 8}" y="{py + 4:.2f}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="11">{_fmt(v)}</text>')
    out.append(f'<text x="{(x0 + x1) / 2}" y="{_H - 12}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="13">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{(y0 + y1) / 2}" text-anchor="middle" font-family="sans-serif" '
               f'font-size="13" transform="rotate(-90 16 {(y0 + y1) / 2})">{escape(ylabel)}</text>')
    return out


def _write(path, lines) -> Path:
    path = Path(path)
    try:
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"could not write plot to {path}: {exc}") from exc
    return path


def line_plot(path, series, title="", xlabel="", ylabel="", provenance=None,
              logy: bool = False) -> Path:
    """``series`` is a list of ``(label, x, y)``; every curve must be non-empty and finite."""
    if not series:
        raise ValueError("line plot needs at least one series")
    clean = []
    for label, x, y in series:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.size == 0 or y.size == 0:
            raise ValueError(f"series {label!r} is empty")
        if x.shape != y.shape:
            raise ValueError(f"series {label!r}: x and y lengths differ")
        if logy:
            if np.any(y <= 0):
                raise ValueError(f"series {label!r}: log axis needs positive values")
            y = np.log10(y)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError(f"series {label!r} has non-finite values")
        clean.append((label, x, y))
    xs = np.concatenate([c[1] for c in clean])
    ys = np.concatenate([c[2] for c in clean])
    xr = (float(xs.min()), float(xs.max()))
    yr = (float(ys.min()), float(ys.max()))
    if yr[0] == yr[1]:
        yr = (yr[0] - 0.5, yr[1] + 0.5)
    x0, x1, y0, y1 = _LEFT, _W - _RIGHT, _H - _BOTTOM, _TOP
    lines = _header(title, provenance)
    lines += _axes(xr, yr, xlabel, "log10 " + ylabel if logy else ylabel)
    for i, (label, x, y) in enumerate(clean):
        px = x0 + (x - xr[0]) / ((xr[1] - xr[0]) or 1) * (x1 - x0)
        py = y0 - (y - yr[0]) / (yr[1] - yr[0]) * (y0 - y1)
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
        color = _COLORS[i % len(_COLORS)]
        lines.append(f'<polyline class="series" data-label="{escape(label)}" fill="none" '
                     f'stroke="{color}" stroke-width="1.6" points="{pts}"/>')
        lines.append(f'<text x="{x1 - 150}" y="{y1 + 16 + 16 * i}" font-family="sans-serif" '
                     f'font-size="12" fill="{color}">{escape(label)}</text>')
    lines.append("</svg>")
    return _write(path, lines)


def max_pool(m: np.ndarray, cap: int = 400) -> np.ndarray:
    """Shrink ``m`` to at most ``cap`` cells per axis by block maxima."""
    m = np.asarray(m, dtype=float)
    rows, cols = m.shape
    fr, fc = -(-rows // cap), -(-cols // cap)
    if fr == 1 and fc == 1:
        return m
    pr, pc = -(-rows // fr) * fr, -(-cols // fc) * fc
    padded = np.full((pr, pc), -np.inf)
    padded[:rows, :cols] = m
    return padded.reshape(pr // fr, fr, pc // fc, fc).max(axis=(1, 3))


def _color(v: float) -> str:
    v = min(max(v, 0.0), 1.0) * (len(_CMAP) - 1)
    i = min(int(v), len(_CMAP) - 2)
    c = _CMAP[i] + (v - i) * (_CMAP[i + 1] - _CMAP[i])
    return "#{:02x}{:02x}{:02x}".format(*np.round(c).astype(int))


def heatmap(path, matrix, x=None, y=None, title="", xlabel="", ylabel="", provenance=None,
            cap: int = 400) -> Path:
    """Rect-grid heatmap; row ``i`` is drawn at height ``y[i]`` (upwards), column ``j`` at ``x[j]``."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.size == 0:
        raise ValueError("heatmap needs a non-empty 2-D array")
    if not np.all(np.isfinite(m)):
        raise ValueError("heatmap data has non-finite values")
    x = np.arange(m.shape[1]) if x is None else np.asarray(x, dtype=float)
    y = np.arange(m.shape[0]) if y is None else np.asarray(y, dtype=float)
    pooled = max_pool(m, cap)
    lo, hi = float(pooled.min()), float(pooled.max())
    scale = (pooled - lo) / (hi - lo) if hi > lo else np.zeros_like(pooled)
    nr, nc = pooled.shape
    x0, x1, y0, y1 = _LEFT, _W - _RIGHT - 60, _H - _BOTTOM, _TOP
    cw, ch = (x1 - x0) / nc, (y0 - y1) / nr
    lines = _header(title, provenance)
    lines.append('<g class="cells" shape-rendering="crispEdges">')
    for i in range(nr):
        py = y0 - (i + 1) * ch
        for j in range(nc):
            lines.append(f'<rect data-i="{i}" data-j="{j}" x="{x0 + j * cw:.3f}" y="{py:.3f}" '
                         f'width="{cw + 0.05:.3f}" height="{ch + 0.05:.3f}" '
                         f'fill="{_color(scale[i, j])}"/>')
    lines.append("</g>")
    lines += _axes((float(x[0]), float(x[-1])), (float(y[0]), float(y[-1])), xlabel, ylabel,
                   (x0, x1, y0, y1))
    for k in range(50):
        lines.append(f'<rect x="{x1 + 20}" y="{y0 - (k + 1) * (y0 - y1) / 50:.2f}" width="14" '
                     f'height="{(y0 - y1) / 50 + 0.05:.2f}" fill="{_color(k / 49)}"/>')
    lines.append(f'<text x="{x1 + 38}" y="{y0}" font-family="sans-serif" font-size="11">{_fmt(lo)}</text>')
    lines.append(f'<text x="{x1 + 38}" y="{y1 + 8}" font-family="sans-serif" font-size="11">{_fmt(hi)}</text>')
    lines.append("</svg>")
    return _write(path, lines)


def render_plot(data, kind: str, path, **kwargs) -> Path:
    """Dispatch to :func:`line_plot` (``data`` = series list) or :func:`heatmap` (``data`` = matrix)."""
    if kind == "line":
        return line_plot(path, data, **kwargs)
    if kind == "heatmap":
        return heatmap(path, data, **kwargs)
    raise ValueError(f"unknown plot kind {kind!r}")

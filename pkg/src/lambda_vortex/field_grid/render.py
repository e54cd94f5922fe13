"""Quick-look figures: P6 heatmaps, SVG polarization glyphs, SVG line plots."""

from __future__ import annotations

import math
from enum import Enum
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from ..polarimetry import CLASS_CODES, PolarizationClass

BACKGROUND = (255, 255, 255)


class Palette(str, Enum):
    GRAY = "gray"
    HOT = "hot"
    VIRIDIS = "viridis"


# control points (position, r, g, b); linear interpolation between them
_STOPS = {
    Palette.GRAY: [(0.0, 0, 0, 0), (1.0, 255, 255, 255)],
    Palette.HOT: [(0.0, 0, 0, 0), (0.4, 230, 0, 0), (0.8, 255, 210, 0), (1.0, 255, 255, 255)],
    Palette.VIRIDIS: [
        (0.0, 68, 1, 84),
        (0.25, 59, 82, 139),
        (0.5, 33, 145, 140),
        (0.75, 94, 201, 98),
        (1.0, 253, 231, 37),
    ],
}


def _lut(palette: Palette) -> np.ndarray:
    stops = np.array(_STOPS[palette], dtype=float)
    t = np.linspace(0.0, 1.0, 256)
    return np.stack([np.interp(t, stops[:, 0], stops[:, c]) for c in (1, 2, 3)], axis=1).round().astype(np.uint8)


def heatmap_rgb(data, palette: Palette | str = Palette.VIRIDIS) -> np.ndarray:
    """Min-max normalized RGB image; NaN pixels get the background colour.

    Row 0 of the image is the largest y, so ``data[i, j]`` indexed as
    (y, x) displays the right way up.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.size == 0:
        raise ValueError("heatmap data must be a non-empty 2-D array")
    palette = Palette(palette)
    finite = np.isfinite(data)
    idx = np.zeros(data.shape, dtype=np.intp)
    if finite.any():
        lo, hi = float(data[finite].min()), float(data[finite].max())
        if hi > lo:
            scaled = (np.where(finite, data, lo) - lo) / (hi - lo)
            idx = np.clip(np.round(scaled * 255), 0, 255).astype(np.intp)
    rgb = _lut(palette)[idx]
    rgb[~finite] = BACKGROUND
    return rgb[::-1]


def render_heatmap(data, path, palette: Palette | str = Palette.VIRIDIS) -> Path:
    rgb = heatmap_rgb(data, palette)
    h, w, _ = rgb.shape
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(rgb).tobytes())
    return path


def read_ppm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while data[pos : pos + 1].isspace():
            pos += 1
        end = pos
        while not data[end : end + 1].isspace():
            end += 1
        tokens.append(data[pos:end])
        pos = end
    pos += 1  # single whitespace byte before the raster
    if tokens[0] != b"P6":
        raise ValueError("not a binary PPM")
    w, h, maxval = (int(t) for t in tokens[1:])
    if maxval != 255:
        raise ValueError("only 8-bit PPM supported")
    pixels = np.frombuffer(data, dtype=np.uint8, count=w * h * 3, offset=pos)
    return pixels.reshape(h, w, 3)


_GLYPH_COLOURS = {
    PolarizationClass.LINEAR: "#e6c200",
    PolarizationClass.LEFT_CIRCULAR: "#d62728",
    PolarizationClass.ELLIPTICAL_LEFT: "#d62728",
    PolarizationClass.RIGHT_CIRCULAR: "#1f5fd6",
    PolarizationClass.ELLIPTICAL_RIGHT: "#1f5fd6",
}


def render_glyphs_svg(stokes_map, path, lattice: int = 16, size: int = 512, title: str | None = None) -> Path:
    """Intensity backdrop with one polarization glyph per lattice cell.

    Linear states are drawn as lines (yellow), elliptical and circular ones as
    ellipses, red for left-handed and blue for right-handed. Glyph size
    follows sqrt(S0 / max S0); undefined pixels get no glyph.
    """
    if lattice < 1:
        raise ValueError("lattice must be >= 1")
    n = stokes_map.grid.n
    s0 = stokes_map.s0
    peak = float(np.max(s0)) if s0.size else 0.0
    cell = size / lattice
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    if title:
        out.append(f"<title>{escape(title)}</title>")

    # coarse grey backdrop: darker means brighter beam
    back = 64
    step = max(1, n // back)
    px = size / (n / step)
    for bi, i in enumerate(range(0, n - step + 1, step)):
        for bj, j in enumerate(range(0, n - step + 1, step)):
            v = float(s0[i : i + step, j : j + step].mean()) / peak if peak > 0 else 0.0
            g = int(round(255 * (1 - 0.85 * min(1.0, v))))
            y = size - (bi + 1) * px
            out.append(f'<rect x="{bj * px:.2f}" y="{y:.2f}" width="{px + 0.05:.2f}" height="{px + 0.05:.2f}" fill="rgb({g},{g},{g})"/>')

    for gi in range(lattice):
        for gj in range(lattice):
            i = int((gi + 0.5) * n / lattice)
            j = int((gj + 0.5) * n / lattice)
            zeta, xi = float(stokes_map.zeta[i, j]), float(stokes_map.xi[i, j])
            if math.isnan(zeta) or peak <= 0:
                continue
            cls = CLASS_CODES[int(stokes_map.cls[i, j])]
            colour = _GLYPH_COLOURS.get(cls)
            if colour is None:
                continue
            scale = 0.45 * cell * math.sqrt(float(s0[i, j]) / peak)
            if scale < 0.5:
                continue
            cx = (gj + 0.5) * cell
            cy = size - (gi + 0.5) * cell
            # SVG y grows downwards, so a counter-clockwise xi is a negative rotation
            rot = -math.degrees(xi)
            if cls is PolarizationClass.LINEAR:
                out.append(
                    f'<line x1="{cx - scale:.2f}" y1="{cy:.2f}" x2="{cx + scale:.2f}" y2="{cy:.2f}" '
                    f'stroke="{colour}" stroke-width="1.5" transform="rotate({rot:.3f} {cx:.2f} {cy:.2f})"/>'
                )
            else:
                a = scale * math.cos(zeta)
                b = scale * abs(math.sin(zeta))
                out.append(
                    f'<ellipse cx="{cx:.2f}" cy="{cy:.2f}" rx="{a:.2f}" ry="{max(b, 0.3):.2f}" fill="none" '
                    f'stroke="{colour}" stroke-width="1.2" transform="rotate({rot:.3f} {cx:.2f} {cy:.2f})"/>'
                )
    out.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(out) + "\n", encoding="utf-8")
    return path


def render_curve_svg(xs, ys, path, xlabel: str = "", ylabel: str = "", width: int = 480, height: int = 320) -> Path:
    """Plain polyline plot; NaN points split the line."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size == 0 or xs.shape != ys.shape:
        raise ValueError("curve needs equally sized, non-empty x and y")
    m = 48
    ok = np.isfinite(ys)
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = (float(ys[ok].min()), float(ys[ok].max())) if ok.any() else (0.0, 1.0)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1

    def sx(v):
        return m + (v - x0) / (x1 - x0) * (width - 2 * m)

    def sy(v):
        return height - m - (v - y0) / (y1 - y0) * (height - 2 * m)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{m}" y1="{height - m}" x2="{width - m}" y2="{height - m}" stroke="black"/>',
        f'<line x1="{m}" y1="{m}" x2="{m}" y2="{height - m}" stroke="black"/>',
        f'<text x="{width / 2}" y="{height - 12}" text-anchor="middle" font-size="13">{escape(xlabel)}</text>',
        f'<text x="14" y="{height / 2}" text-anchor="middle" font-size="13" transform="rotate(-90 14 {height / 2})">{escape(ylabel)}</text>',
        f'<text x="{m}" y="{height - m + 16}" font-size="11" text-anchor="middle">{x0:g}</text>',
        f'<text x="{width - m}" y="{height - m + 16}" font-size="11" text-anchor="middle">{x1:g}</text>',
        f'<text x="{m - 4}" y="{height - m}" font-size="11" text-anchor="end">{y0:g}</text>',
        f'<text x="{m - 4}" y="{m + 4}" font-size="11" text-anchor="end">{y1:g}</text>',
    ]
    run: list[str] = []
    for x, y, good in zip(xs, ys, ok):
        if good:
            run.append(f"{sx(x):.2f},{sy(y):.2f}")
        elif run:
            out.append(f'<polyline points="{" ".join(run)}" fill="none" stroke="#1f5fd6" stroke-width="2"/>')
            run = []
    if len(run) == 1:
        cx, cy = run[0].split(",")
        out.append(f'<circle cx="{cx}" cy="{cy}" r="3" fill="#1f5fd6"/>')
    elif run:
        out.append(f'<polyline points="{" ".join(run)}" fill="none" stroke="#1f5fd6" stroke-width="2"/>')
    out.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(out) + "\n", encoding="utf-8")
    return path

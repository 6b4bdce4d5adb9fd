"""Static figure output: naming-grid mosaics and IB-plane scatter plots.

Everything is written as self-contained SVG with deterministic float
formatting, so rendered output is byte-stable and diffable.  Rendering is
display-only; no analysis consumes anything produced here.
"""

from __future__ import annotations

from typing import IO, Sequence

import numpy as np

from .grid import ChipGrid
from .ib import IBCurve, NamingSystem, mode_map
from .util import open_text

ROW_LETTERS = "ABCDEFGHIJ"


def lab_to_srgb(lab: Sequence[float]) -> tuple[float, float, float]:
    """CIELAB (D65) to sRGB in [0,1]; out-of-gamut channels are clipped."""
    l_star, a_star, b_star = float(lab[0]), float(lab[1]), float(lab[2])
    fy = (l_star + 16.0) / 116.0
    fx = fy + a_star / 500.0
    fz = fy - b_star / 200.0

    def f_inv(t: float) -> float:
        return t**3 if t**3 > 0.008856 else (t - 16.0 / 116.0) / 7.787

    # D65 reference white
    x = 0.95047 * f_inv(fx)
    y = 1.00000 * f_inv(fy)
    z = 1.08883 * f_inv(fz)

    r = x * 3.2406 + y * -1.5372 + z * -0.4986
    g = x * -0.9689 + y * 1.8758 + z * 0.0415
    b = x * 0.0557 + y * -0.2040 + z * 1.0570

    def gamma(c: float) -> float:
        c = 1.055 * c ** (1.0 / 2.4) - 0.055 if c > 0.0031308 else 12.92 * c
        return min(1.0, max(0.0, c))

    return gamma(r), gamma(g), gamma(b)


def _hex_color(rgb: tuple[float, float, float]) -> str:
    return "#" + "".join(f"{round(c * 255):02x}" for c in rgb)


def _blend_white(rgb: tuple[float, float, float], keep: float) -> tuple[float, float, float]:
    return tuple(keep * c + (1.0 - keep) for c in rgb)  # type: ignore[return-value]


def render_map(
    sys: NamingSystem,
    grid: ChipGrid,
    dest: str | IO[str],
    cell: int = 14,
) -> None:
    """10x41 mosaic of the naming grid under `sys`'s modal categories.

    Each cell takes the mean CIELAB color of its modal category; cells
    whose top word probability is in [0.75, 1] render at full strength,
    [0.3, 0.75) faded, and below 0.3 blank.
    """
    mmap = mode_map(sys)
    cat_color: dict[int, tuple[float, float, float]] = {}
    for w in np.unique(mmap.words):
        members = mmap.words == w
        cat_color[int(w)] = lab_to_srgb(grid.lab[members].mean(axis=0))

    width, height = cell * 41, cell * 10
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    for chip, word, band in zip(grid.chips, mmap.words, mmap.band):
        if band == 0:
            continue
        rgb = cat_color[int(word)]
        if band == 1:
            rgb = _blend_white(rgb, 0.45)
        x = chip.col * cell
        y = ROW_LETTERS.index(chip.row) * cell
        parts.append(
            f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
            f'fill="{_hex_color(rgb)}"/>'
        )
    parts.append("</svg>")
    stream, owned = open_text(dest, "w")
    try:
        stream.write("\n".join(parts) + "\n")
    finally:
        if owned:
            stream.close()


def render_ib_plane(
    curve: IBCurve | None,
    points: Sequence[tuple[float, float, str]],
    dest: str | IO[str],
    width: int = 640,
    height: int = 480,
) -> None:
    """Scatter of (complexity, accuracy, css-color) points with the frontier.

    The frontier, when given, is drawn as a single polyline.
    """
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    if curve is not None:
        xs = xs + list(curve.complexities())
        ys = ys + list(curve.accuracies())
    x_max = max(xs + [1.0]) * 1.05
    y_max = max(ys + [1.0]) * 1.05
    margin = 40

    def sx(v: float) -> float:
        return margin + v / x_max * (width - 2 * margin)

    def sy(v: float) -> float:
        return height - margin - v / y_max * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" '
        f'stroke="black"/>',
    ]
    if curve is not None:
        order = np.argsort(curve.complexities(), kind="stable")
        coords = " ".join(
            f"{sx(curve.points[i].complexity):.2f},{sy(curve.points[i].accuracy):.2f}"
            for i in order
        )
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="black" '
            f'stroke-dasharray="6,4"/>'
        )
    for cx, ax, color in points:
        parts.append(
            f'<circle cx="{sx(cx):.2f}" cy="{sy(ax):.2f}" r="3" fill="{color}" '
            f'fill-opacity="0.7"/>'
        )
    parts.append("</svg>")
    stream, owned = open_text(dest, "w")
    try:
        stream.write("\n".join(parts) + "\n")
    finally:
        if owned:
            stream.close()


def render_histogram(
    groups: Sequence[tuple[str, Sequence[float], str]],
    dest: str | IO[str],
    bins: int = 24,
    width: int = 640,
    height: int = 360,
) -> None:
    """Overlaid histograms of named value groups (name, values, css-color)."""
    all_values = [v for _, vals, _ in groups for v in vals]
    lo = min(all_values + [0.0])
    hi = max(all_values + [1.0])
    margin = 40
    bar_w = (width - 2 * margin) / bins
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    peak = 1
    counts_by_group = []
    for _, vals, _ in groups:
        counts = [0] * bins
        for v in vals:
            i = min(int((v - lo) / (hi - lo + 1e-12) * bins), bins - 1)
            counts[i] += 1
        counts_by_group.append(counts)
        peak = max(peak, max(counts))
    for (name, _, color), counts in zip(groups, counts_by_group):
        for i, c in enumerate(counts):
            if c == 0:
                continue
            h = c / peak * (height - 2 * margin)
            x = margin + i * bar_w
            parts.append(
                f'<rect x="{x:.2f}" y="{height - margin - h:.2f}" width="{bar_w:.2f}" '
                f'height="{h:.2f}" fill="{color}" fill-opacity="0.45"/>'
            )
    parts.append("</svg>")
    stream, owned = open_text(dest, "w")
    try:
        stream.write("\n".join(parts) + "\n")
    finally:
        if owned:
            stream.close()

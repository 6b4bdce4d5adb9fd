#!/usr/bin/env python3
"""Regenerate the bundled 330-chip palette (src/colorevo/data/chips.tsv).

The bundled table is a synthetic stand-in for a measured Munsell-style
palette: 10 achromatic chips (rows A-J, column 0) plus 8 chromatic rows
(B-I) x 40 hue columns.  Lightness levels and the maximum-chroma envelope
approximate the scale of real renotation data, so perceptual distances are
realistic, but the coordinates are generated, not measured.  Drop in a
measured table (same TSV layout) to analyze real stimuli.
"""

import math
import os

ROWS = "ABCDEFGHIJ"

# L* per row A..J (white down to black).
L_STAR = [96.0, 91.1, 81.4, 71.6, 61.7, 51.6, 41.2, 30.8, 20.5, 15.6]

# Chroma envelope for chromatic rows B..I: base radius, plus a hue-dependent
# bulge whose peak drifts from yellow at high lightness to blue-purple at
# low lightness (roughly how maximum chroma behaves in the real color solid).
C_BASE = [30.0, 42.0, 50.0, 55.0, 56.0, 52.0, 44.0, 32.0]
C_AMP = 0.40
PEAK_HUE_DEG = [96.0, 90.0, 70.0, 45.0, 10.0, -30.0, -60.0, -75.0]
HUE_OFFSET_DEG = 20.0  # column 1 sits in the red region


def chips():
    rows = []
    index = 0
    for i, letter in enumerate(ROWS):
        rows.append((index, letter, 0, L_STAR[i], 0.0, 0.0))
        index += 1
    for i, letter in enumerate(ROWS[1:9]):  # B..I
        for col in range(1, 41):
            theta = math.radians(360.0 * (col - 1) / 40.0 + HUE_OFFSET_DEG)
            peak = math.radians(PEAK_HUE_DEG[i])
            c = C_BASE[i] * (1.0 + C_AMP * math.cos(theta - peak))
            a = c * math.cos(theta)
            b = c * math.sin(theta)
            rows.append((index, letter, col, L_STAR[i + 1], a, b))
            index += 1
    return rows


def main():
    out = os.path.join(
        os.path.dirname(__file__), "..", "src", "colorevo", "data", "chips.tsv"
    )
    out = os.path.normpath(out)
    os.makedirs(os.path.dirname(out), exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("index\trow\tcol\tL\ta\tb\n")
        for index, letter, col, L, a, b in chips():
            fh.write(f"{index}\t{letter}\t{col}\t{L:.2f}\t{a:.2f}\t{b:.2f}\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()

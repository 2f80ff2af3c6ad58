"""Polyline glyph assets for the tracing task.

Original stylized lowercase glyphs built from line segments and sampled
circular arcs.  Every glyph fits a 0.10 m wide x 0.15 m tall box with its
baseline at v=0; letter sets are laid out left to right and centered on
the board origin.
"""

from __future__ import annotations

import math

import numpy as np

GLYPH_WIDTH = 0.10
GLYPH_HEIGHT = 0.15
GLYPH_ADVANCE = 0.12
ARC_POINTS_PER_TURN = 24

LETTER_SETS = ("hri", "ros", "lab", "practice")


class UnknownLetterSet(ValueError):
    pass


def _arc(center, radius, start_deg, end_deg):
    n = max(4, int(round(ARC_POINTS_PER_TURN * abs(end_deg - start_deg) / 360.0)))
    angles = np.radians(np.linspace(start_deg, end_deg, n + 1))
    cx, cy = center
    return [(cx + radius * math.cos(a), cy + radius * math.sin(a)) for a in angles]


def _glyph(letter: str) -> list[list[tuple[float, float]]]:
    if letter == "h":
        return [
            [(0.01, 0.15), (0.01, 0.00)],
            [(0.01, 0.05)] + _arc((0.05, 0.05), 0.04, 180, 0) + [(0.09, 0.00)],
        ]
    if letter == "r":
        return [
            [(0.01, 0.10), (0.01, 0.00)],
            [(0.01, 0.06)] + _arc((0.05, 0.06), 0.04, 180, 20),
        ]
    if letter == "i":
        return [
            [(0.05, 0.10), (0.05, 0.00)],
            _arc((0.05, 0.13), 0.008, 90, 450),
        ]
    if letter == "o":
        return [_arc((0.05, 0.05), 0.04, 90, 450)]
    if letter == "s":
        return [_arc((0.05, 0.075), 0.025, 45, 270) + _arc((0.05, 0.025), 0.025, 90, -135)[1:]]
    if letter == "l":
        return [[(0.05, 0.15), (0.05, 0.00)]]
    if letter == "a":
        return [
            _arc((0.045, 0.05), 0.035, 90, 450),
            [(0.08, 0.085), (0.08, 0.00)],
        ]
    if letter == "b":
        return [
            [(0.01, 0.15), (0.01, 0.00)],
            _arc((0.045, 0.045), 0.035, 180, -180),
        ]
    raise UnknownLetterSet(f"no glyph for letter {letter!r}")


_PRACTICE = [
    # four-point polyline
    [(0.00, 0.00), (0.04, 0.10), (0.08, 0.02), (0.10, 0.12)],
    # semicircular arc
    _arc((0.22, 0.05), 0.05, 180, 0),
]


def letter_paths(set_name: str) -> list[list[tuple[float, float]]]:
    """Stroke polylines (board coordinates, meters) for a letter set,
    centered on the board origin.  Raises UnknownLetterSet otherwise."""
    if set_name == "practice":
        strokes = _PRACTICE
        width = 0.27
    elif set_name in LETTER_SETS:
        strokes = []
        for slot, letter in enumerate(set_name):
            dx = slot * GLYPH_ADVANCE
            for stroke in _glyph(letter):
                strokes.append([(x + dx, y) for x, y in stroke])
        width = (len(set_name) - 1) * GLYPH_ADVANCE + GLYPH_WIDTH
    else:
        raise UnknownLetterSet(f"unknown letter set {set_name!r}")
    ox, oy = width / 2.0, GLYPH_HEIGHT / 2.0
    return [[(x - ox, y - oy) for x, y in stroke] for stroke in strokes]


def tracing_target(set_name: str) -> np.ndarray:
    """Single target polyline for a trial: the set's strokes concatenated in
    order (the pen never leaves the board, so stroke gaps are traced too)."""
    strokes = letter_paths(set_name)
    points: list[tuple[float, float]] = []
    for stroke in strokes:
        points.extend(stroke)
    return np.array(points)

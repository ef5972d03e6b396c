"""Named flat-shading palette.

Each scene assigns every object a unique color from this table; the color
doubles as the render palette and as the identity key the evaluator uses
to recover object state from an edited image. Entries are chosen so that
no two colors come within the classification tolerance of each other even
after the renderer's face-shade factors (1.0 / 0.85 / 0.7) are applied.
"""

from __future__ import annotations

import numpy as np

SHADE_FACTORS = (1.0, 0.85, 0.7)

# Classification tolerance, per channel, 0..255.
COLOR_TOLERANCE = 24

NAMED_COLORS: dict[str, tuple[int, int, int]] = {
    "red": (220, 40, 40),
    "green": (50, 200, 60),
    "blue": (50, 90, 230),
    "yellow": (235, 220, 50),
    "orange": (240, 140, 20),
    "purple": (150, 50, 210),
    "cyan": (40, 210, 220),
    "magenta": (230, 60, 170),
    "brown": (150, 95, 40),
    "white": (245, 245, 245),
    "teal": (20, 130, 120),
    "pink": (250, 160, 170),
}

BACKGROUND_COLOR = (24, 24, 24)


def shaded_variants(color) -> np.ndarray:
    """The three quantized shade levels of a base color, shape (3, 3)."""
    base = np.asarray(color, dtype=float)
    return np.rint(np.stack([base * s for s in SHADE_FACTORS])).astype(int)


def color_word(color) -> str:
    """Name of the nearest palette entry (exact for scene palettes)."""
    c = np.asarray(color, dtype=float)
    best, best_d = None, None
    for word, rgb in NAMED_COLORS.items():
        d = float(np.max(np.abs(c - np.asarray(rgb, dtype=float))))
        if best_d is None or d < best_d:
            best, best_d = word, d
    return best


def min_shaded_separation(colors) -> int:
    """Smallest L-inf distance between shaded variants of distinct colors."""
    variants = [shaded_variants(c) for c in colors]
    best = 255
    for i in range(len(variants)):
        for j in range(i + 1, len(variants)):
            d = np.abs(variants[i][:, None, :] - variants[j][None, :, :]).max(axis=2)
            best = min(best, int(d.min()))
    return best

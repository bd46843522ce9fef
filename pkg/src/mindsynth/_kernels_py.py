"""numpy fallback for the compositor kernel.

Keep arithmetic in lockstep with `_native.pyx`: same distance predicate
and blend expression, evaluated in the same order, so a frame rendered on
either backend is bit-identical.
"""

import math

import numpy as np


def composite_circle(img, cx, cy, radius, r, g, b, fill_a, stroke_a):
    """Alpha-over one filled circle with a 1-pixel black stroke ring."""
    if radius < 0.0:
        return
    h, w = img.shape[0], img.shape[1]
    x0 = max(0, int(math.floor(cx - radius)))
    x1 = min(w - 1, int(math.ceil(cx + radius)))
    y0 = max(0, int(math.floor(cy - radius)))
    y1 = min(h - 1, int(math.ceil(cy + radius)))
    if x1 < x0 or y1 < y0:
        return

    dx = (np.arange(x0, x1 + 1, dtype=np.float64) + 0.5) - cx
    dy = (np.arange(y0, y1 + 1, dtype=np.float64) + 0.5) - cy
    d = np.sqrt(dx[None, :] * dx[None, :] + dy[:, None] * dy[:, None])
    inside = d <= radius
    ring = inside & (d > radius - 1.0)
    fill = inside & ~ring

    sub = img[y0 : y1 + 1, x0 : x1 + 1]
    kf = 1.0 - fill_a
    ks = 1.0 - stroke_a
    for ch, src in enumerate((r, g, b)):
        plane = sub[:, :, ch]
        plane[fill] = src * fill_a + plane[fill] * kf
        plane[ring] = plane[ring] * ks

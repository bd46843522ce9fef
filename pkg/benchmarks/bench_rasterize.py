"""Benchmark: compiled compositor vs numpy fallback.

Renders the same production-sized frame (1366x768, 100 glyphs) on both
backends, checks they agree bit-for-bit, and prints the timing ratio.

    python benchmarks/bench_rasterize.py [--glyphs N] [--repeats R]
"""

import argparse
import time

import numpy as np

from mindsynth import _kernels_py
from mindsynth.art import DEFAULT_PALETTE, ArtState, circle_field_frame

try:
    from mindsynth import _native
except ImportError:
    _native = None


def render(scene, composite):
    img = np.zeros((scene.height, scene.width, 3))
    for g in scene.glyphs:
        rgb = DEFAULT_PALETTE[g.color_index]
        composite(
            img, g.x, g.y, g.diameter / 2.0,
            float(rgb[0]), float(rgb[1]), float(rgb[2]),
            g.alpha / 255.0, 50 / 255.0,
        )
    return img


def bench(scene, composite, repeats):
    best = float("inf")
    img = None
    for _ in range(repeats):
        start = time.perf_counter()
        img = render(scene, composite)
        best = min(best, time.perf_counter() - start)
    return best, img


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--glyphs", type=int, default=100)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    state = ArtState(cc=args.glyphs, div=9, att=40, med=90, time_s=2.5)
    scene = circle_field_frame(state)
    print(f"frame: {scene.width}x{scene.height}, {len(scene.glyphs)} glyphs")

    t_py, img_py = bench(scene, _kernels_py.composite_circle, args.repeats)
    print(f"fallback (numpy) : {t_py * 1e3:8.2f} ms/frame  ({1 / t_py:6.1f} fps)")

    if _native is None:
        print("native           : not built")
        return
    t_c, img_c = bench(scene, _native.composite_circle, args.repeats)
    print(f"native (cython)  : {t_c * 1e3:8.2f} ms/frame  ({1 / t_c:6.1f} fps)")
    print(f"speedup          : {t_py / t_c:8.2f}x")
    assert np.array_equal(img_py, img_c), "backends disagree"
    print("backends agree bit-for-bit")


if __name__ == "__main__":
    main()

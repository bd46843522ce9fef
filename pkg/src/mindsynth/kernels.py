"""Selects the rasterizer backend at import time.

The compiled extension is preferred; the numpy fallback is functionally
(and bit-for-bit) identical, just slower. Set MINDSYNTH_PURE_PYTHON=1 to
force the fallback, e.g. for the backend benchmark.
"""

import os

from . import _kernels_py as fallback

try:
    from . import _native as native
except ImportError:  # extension not built; fallback covers everything
    native = None

if native is not None and not os.environ.get("MINDSYNTH_PURE_PYTHON"):
    BACKEND = "native"
    composite_circle = native.composite_circle
else:
    BACKEND = "fallback"
    composite_circle = fallback.composite_circle

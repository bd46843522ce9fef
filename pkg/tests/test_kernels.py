"""Backend selection and equivalence of the compositor kernels."""

import os
import subprocess
import sys

import numpy as np

from mindsynth import kernels


def test_a_backend_is_selected():
    assert kernels.BACKEND in ("native", "fallback")
    assert callable(kernels.composite_circle)


def test_env_var_forces_fallback():
    code = (
        "from mindsynth import kernels; "
        "print(kernels.BACKEND)"
    )
    env = dict(os.environ, MINDSYNTH_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == "fallback"


def test_kernel_degenerate_inputs():
    img = np.zeros((4, 4, 3))
    # negative radius: no-op
    kernels.composite_circle(img, 2.0, 2.0, -1.0, 255.0, 0.0, 0.0, 1.0, 0.2)
    assert not img.any()
    # zero radius: at most the stroke on the center pixel
    kernels.composite_circle(img, 2.5, 2.5, 0.0, 255.0, 0.0, 0.0, 1.0, 0.2)
    assert img[2, 2].sum() == 0.0  # stroke over black stays black
    # fully off-canvas circle: no-op
    kernels.composite_circle(img, -100.0, -100.0, 3.0, 255.0, 0.0, 0.0, 1.0, 0.2)
    assert not img.any()

"""Build script for the compiled rasterizer kernel.

The package works without the extension (a numpy fallback is selected at
import time), so a failed compile only costs speed, not functionality.
"""

import numpy
from setuptools import Extension, setup

from Cython.Build import cythonize

extensions = cythonize(
    [
        Extension(
            "mindsynth._native",
            ["src/mindsynth/_native.pyx"],
            include_dirs=[numpy.get_include()],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        )
    ],
    language_level=3,
)

setup(ext_modules=extensions)

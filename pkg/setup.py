"""Build script for the optional compiled kernel core.

The package is fully functional without the extension (a pure-numpy
fallback is selected at import time); building it just makes the hot
per-slot projection kernels faster.  `python setup.py` degrades to a
pure install when Cython is unavailable.
"""

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = []
if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "echo_cgc._kernels_cy",
                ["src/echo_cgc/_kernels_cy.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=extensions)

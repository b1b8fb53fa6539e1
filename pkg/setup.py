"""Build script: compiles the optional Cython training kernels.

The package is fully functional without the extension (a NumPy fallback is
selected at import time); any compilation failure therefore downgrades to a
pure-Python install instead of aborting.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "wembed.trainer._kernels",
                sources=["src/wembed/trainer/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # noqa: BLE001 - any build-env problem means "no extension"
    sys.stderr.write(f"wembed: building without compiled kernels ({exc})\n")

setup(ext_modules=ext_modules)

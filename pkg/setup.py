"""Build script: compiles the optional Cython kernel extension.

The package is fully functional without the extension (a numpy fallback is
selected at import time), so any failure here degrades to a pure-Python
install instead of aborting.  Set TEMPORA_NO_EXT=1 to skip the compile step
explicitly.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("TEMPORA_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools.extension import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "tempora._ckernels",
                    ["src/tempora/_ckernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={
                "language_level": 3,
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
    except Exception as exc:  # missing Cython/compiler: fall back silently
        print(f"tempora: building without compiled kernels ({exc})")
        ext_modules = []

setup(ext_modules=ext_modules)

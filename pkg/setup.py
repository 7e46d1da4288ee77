"""Build script: compiles the optional Cython chain kernel.

The package works without the extension (a NumPy fallback is selected at
import time), so a failed compile only costs speed.
"""
import os
import sys

from setuptools import setup

ext_modules = []
if os.environ.get("EITCBS_SKIP_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools.extension import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "eitcbs.kernels._chainkern",
                    sources=["src/eitcbs/kernels/_chainkern.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level="3",
        )
    except Exception as exc:  # pragma: no cover - build-environment dependent
        print(f"eitcbs: skipping compiled kernel ({exc})", file=sys.stderr)

setup(ext_modules=ext_modules)

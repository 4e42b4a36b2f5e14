"""Build script: compiles the interception kernel when Cython is available.

The package works without the compiled extension (a pure-Python kernel is
selected at import time), so the build degrades gracefully instead of
failing on machines without a C toolchain.
"""
from setuptools import setup

try:
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    extensions = cythonize(
        [
            Extension(
                "tactic2d.motion._ckernel",
                sources=["src/tactic2d/motion/_ckernel.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level="3",
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)

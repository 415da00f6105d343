"""Build script: compiles the optional Cython speedup kernels.

The package works without the extension (a pure-Python backend is selected at
import time), so a missing compiler or Cython only costs speed, not features.
Set TOPCITE_NO_EXTENSION=1 to skip the compiled kernels entirely.
"""

import os

from setuptools import setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if possible, fall back to pure Python otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"topcite: skipping compiled kernels ({exc}); "
                  "pure-Python backend will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"topcite: failed to build {ext.name} ({exc}); "
                  "pure-Python backend will be used")


def make_extensions():
    if os.environ.get("TOPCITE_NO_EXTENSION"):
        return []
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    ext = Extension(
        "topcite._kernels._speedups",
        ["src/topcite/_kernels/_speedups.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level="3")


setup(
    ext_modules=make_extensions(),
    cmdclass={"build_ext": optional_build_ext},
)

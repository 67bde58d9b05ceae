"""Build script: compiles the optional Cython geometry kernels.

The compiled extension is an accelerator only; if Cython or a C compiler
is unavailable the package installs anyway and tvkit.geometry falls back
to the pure NumPy kernels at import time.
"""
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing or broken toolchain
            print(f"warning: building tvkit._fastgeom failed ({exc}); "
                  "falling back to pure NumPy kernels", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: {ext.name} not built ({exc}); "
                  "falling back to pure NumPy kernels", file=sys.stderr)


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError as exc:
        print(f"warning: {exc}; skipping compiled kernels", file=sys.stderr)
        return []
    ext = Extension(
        "tvkit.geometry._fastgeom",
        sources=["src/tvkit/geometry/_fastgeom.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], language_level="3")


setup(ext_modules=extensions(), cmdclass={"build_ext": optional_build_ext})

"""Build script: compiles the optional integer-pivot kernel.

The package is pure Python except for one hot loop (the fraction-free
simplex pivot). If Cython or a C compiler is unavailable the build falls
back to the pure-Python kernel transparently; `bnbapprox.kernel` selects
the implementation at import time.
"""
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class _OptionalBuildExt(build_ext):
    """Never fail the install because the accelerator did not compile."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # pragma: no cover - toolchain specific
            print(f"warning: skipping compiled kernel ({exc})", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # pragma: no cover - toolchain specific
            print(f"warning: skipping {ext.name} ({exc})", file=sys.stderr)


try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [Extension("bnbapprox._pivot_cy", ["src/bnbapprox/_pivot_cy.pyx"])],
        language_level="3",
    )
except ImportError:  # pragma: no cover - Cython not installed
    extensions = []

setup(ext_modules=extensions, cmdclass={"build_ext": _OptionalBuildExt})

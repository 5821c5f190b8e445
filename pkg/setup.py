"""Build the optional Cython sampling kernel.

If Cython or a C compiler is missing, or ``WEAKSTAT_NO_EXT=1`` is set, the
package still installs and the numpy kernel in ``weakstat._kernels_py`` is
used instead.
"""
import os
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # no compiler, or a compiler error
            print(f"warning: compiled kernel not built ({exc}); using the numpy fallback", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: {ext.name} not built ({exc}); using the numpy fallback", file=sys.stderr)


ext_modules = []
if os.environ.get("WEAKSTAT_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [Extension("weakstat._kernels", ["src/weakstat/_kernels.pyx"], extra_compile_args=["-O3"])],
            compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False, "cdivision": True},
        )

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})

"""Build script for the optional compiled BFS kernel.

The package works without the extension (a pure-Python kernel is selected
at import time), so any compiler failure downgrades to a warning instead of
aborting the install.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    def run(self):
        try:
            build_ext.run(self)
        except Exception as exc:  # compiler missing, etc.
            print("WARNING: compiled kernel skipped (%s); "
                  "falling back to pure Python" % exc, file=sys.stderr)

    def build_extension(self, ext):
        try:
            build_ext.build_extension(self, ext)
        except Exception as exc:
            print("WARNING: could not build %s (%s)" % (ext.name, exc),
                  file=sys.stderr)


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    return cythonize(
        [Extension("agverify._kernel._speedups",
                   ["src/agverify/_kernel/_speedups.pyx"])],
        language_level=3,
    )


setup(ext_modules=extensions(), cmdclass={"build_ext": optional_build_ext})

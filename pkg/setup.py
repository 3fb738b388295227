"""Build hook for the optional compiled kernel backend.

The package is fully functional without the extension (the numpy backend is
selected at import time), so any failure here downgrades to a warning instead
of aborting the install. Set NOISYLAB_SKIP_EXT=1 to skip compilation.
"""

import os
import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, broken toolchain, ...
            warnings.warn(f"compiled kernels skipped: {exc}")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"compiled kernels skipped ({ext.name}): {exc}")


def extensions():
    if os.environ.get("NOISYLAB_SKIP_EXT"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        warnings.warn("Cython not available; installing with numpy kernels only")
        return []
    return cythonize(
        [Extension("noisylab.kernels._ckern", ["src/noisylab/kernels/_ckern.pyx"])],
        language_level=3,
    )


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})

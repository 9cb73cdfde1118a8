"""Build script: compiles the optional enumeration kernel.

The compiled extension is a speedup only; the package falls back to the
pure-Python kernel when the extension is absent (set RELLADDER_NO_EXT=1 to
skip the build deliberately).
"""

import os

from setuptools import Extension, setup


def extensions():
    if os.environ.get("RELLADDER_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension("relladder._core_fast", ["src/relladder/_core_fast.pyx"])
    return cythonize([ext], language_level=3)


setup(ext_modules=extensions())

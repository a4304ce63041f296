"""Build script: compiles the optional statevector extension.

The extension is a performance core only; if Cython or a C compiler is
unavailable (or QPACK_NO_EXT=1 is set) the package installs without it and
falls back to the NumPy reference backend at import time.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("QPACK_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "qpack.backends._core",
                    ["src/qpack/backends/_core.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)

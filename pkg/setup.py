"""Build script: compiles the hot simulation kernels when Cython is available.

Set AOIDROP_NO_EXT=1 to skip the extension entirely; the package then runs on
the pure-Python kernels selected automatically at import.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("AOIDROP_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "aoidrop._kernels",
                    ["src/aoidrop/_kernels.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)

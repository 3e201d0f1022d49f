import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("POLYMEET_PURE") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension("polymeet._kernels", ["src/polymeet/_kernels.pyx"])],
            language_level="3",
        )
    except ImportError:
        # Pure-Python fallback is selected at import time.
        ext_modules = []

setup(ext_modules=ext_modules)

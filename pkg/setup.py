from setuptools import Extension, setup

import numpy as np

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "degenpot._ckern",
                ["src/degenpot/_ckern.pyx"],
                include_dirs=[np.get_include()],
            )
        ],
        language_level=3,
    )
except ImportError:
    # Pure-python fallback backend is selected at import time; the wheel
    # still works without the compiled core.
    ext_modules = []

setup(ext_modules=ext_modules)

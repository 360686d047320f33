"""Build script for the compiled simulation kernels.

The package works without the extension (a NumPy fallback is selected at
import time); building it just makes the inner loops much faster.
"""

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "isbst._kernels",
        ["src/isbst/_kernels.pyx"],
        include_dirs=[np.get_include()],
    ),
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
    ),
)

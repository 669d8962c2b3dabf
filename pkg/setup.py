"""Build script for the optional compiled spectral kernel.

The package works without the extension (a numpy fallback is selected at
import time), so a failed compile only costs performance.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
    import numpy as np

    extensions = cythonize(
        [
            Extension(
                "gnpest.linalg._ckern",
                ["src/gnpest/linalg/_ckern.pyx"],
                include_dirs=[np.get_include()],
                # -ffast-math lets gcc vectorize the float32 row reduction;
                # results stay deterministic for a given build.
                extra_compile_args=["-O3", "-march=native", "-ffast-math"],
            )
        ],
        language_level="3",
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "czwave._pairquad",
                ["src/czwave/_pairquad.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    # no Cython: the package falls back to the pure numpy kernels at import
    ext_modules = []

setup(ext_modules=ext_modules)

import numpy
from setuptools import Extension, setup

# The compiled kernels are an optimization, not a requirement: if Cython or a
# C compiler is unavailable the package falls back to the NumPy kernels at
# import time (see fckan.kernels).
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "fckan._kernels_cy",
                ["src/fckan/_kernels_cy.pyx"],
                extra_compile_args=["-O3"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)

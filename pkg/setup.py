"""Build script for the optional compiled pixel-scan kernel.

The package works without the extension (a numpy fallback is selected at
import time); building it just makes template search much faster.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "adwar.perceptual._kernels_cy",
                ["src/adwar/perceptual/_kernels_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # Cython/numpy missing at build time: ship pure-python wheel.
    ext_modules = []

setup(ext_modules=ext_modules)

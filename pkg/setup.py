import os

from setuptools import Extension, setup

# The compiled kernel is optional: without Cython or a C compiler the
# package falls back to d2dsim._kernels_py (same results, slower).
ext_modules = []
if os.environ.get("D2DSIM_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "d2dsim._kernels",
                    ["src/d2dsim/_kernels.pyx"],
                    # bit-identical to the pure-Python fallback: no FMA
                    # contraction, and no sin+cos -> sincos combining (glibc
                    # sincos rounds differently from cos on rare inputs)
                    extra_compile_args=[
                        "-O2",
                        "-ffp-contract=off",
                        "-fno-builtin-sin",
                        "-fno-builtin-cos",
                        "-fno-builtin-sincos",
                    ],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)

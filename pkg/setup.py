import os

from setuptools import Extension, setup

# The compiled kernels are optional; the package falls back to numpy.
ext_modules = []
if os.environ.get("GRIDPROD_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "gridprod._ckernels",
                    ["src/gridprod/_ckernels.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)

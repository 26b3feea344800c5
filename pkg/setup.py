import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "ontosim._kernels_c",
                ["src/ontosim/_kernels_c.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
    )
except ImportError:
    # pure-python fallback in ontosim.kernels keeps the package usable
    ext_modules = []

setup(ext_modules=ext_modules)

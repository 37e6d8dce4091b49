import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover
    cythonize = None

extra_compile_args = ["-O3"]
if os.environ.get("DEBUG"):
    extra_compile_args = ["-O0", "-g3"]

ext_modules = []
if cythonize is not None and not os.environ.get("LDPC_WORKBENCH_NO_EXT"):
    ext_modules = cythonize(
        [
            Extension(
                "ldpc_workbench._kernels",
                ["src/ldpc_workbench/_kernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=extra_compile_args,
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)

import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

# the kernel must round exactly like the pure-Python path: no FMA contraction,
# no fast-math
extra_compile_args = ["-O2", "-ffp-contract=off", "-fno-fast-math"]

ext_modules = []
if cythonize is not None and not os.environ.get("POLARSIM_NO_EXT"):
    ext_modules = cythonize(
        [
            Extension(
                "polarsim._kernel",
                ["src/polarsim/_kernel.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=extra_compile_args,
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)

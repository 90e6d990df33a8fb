"""Build the optional Cython kernels.

``pip install -e . --no-build-isolation`` compiles ``_ckernels``; when Cython
or a C compiler is missing the package still installs and runs on the
pure-Python kernels.
"""
import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "blenderlab._ckernels",
                ["src/blenderlab/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)

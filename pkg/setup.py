# Build with:
#    pip install -e . --no-build-isolation
# The Cython kernels are optional; without a compiler the package falls
# back to the pure-Python implementations in cvclone/_kernels_py.py.

import os

from setuptools import setup

ext_modules = []
if os.environ.get("CVCLONE_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "cvclone._ckernels",
                    ["src/cvclone/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)

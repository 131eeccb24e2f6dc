"""Build script: compiles the optional Cython kernel extension.

The package is fully functional without the extension (zlog.kernels falls
back to the numpy implementations in zlog._kernels_py), so the extension is
marked optional: a missing compiler degrades the install instead of failing
it.
"""

import os

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    if not os.path.exists("src/zlog/_kernels.pyx"):
        raise ImportError("no kernel source in this tree")
    ext_modules = cythonize(
        [
            Extension(
                "zlog._kernels",
                ["src/zlog/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    # No Cython available: ship pure-Python only.
    ext_modules = []

setup(ext_modules=ext_modules)

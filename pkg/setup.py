"""Build script: compiles the Cython kernel extension when Cython is available.

The package works without the extension (a NumPy fallback is selected at
import time), so a failed extension build only costs speed, not features.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "terraclass.kernels._cy",
                ["src/terraclass/kernels/_cy.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O2"],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)

import numpy
from setuptools import Extension, setup

# The conv kernels compile to a C extension when a toolchain is available.
# Installation must still succeed without one: eitventlab.ndtensor falls back
# to the numpy kernels at import time if the extension is missing.
try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "eitventlab.ndtensor._convkernels",
                ["src/eitventlab/ndtensor/_convkernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)

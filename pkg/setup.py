import os

import numpy as np
from setuptools import Extension, setup

PYX = "src/marchsim/_kernels.pyx"

extensions = []
if os.path.exists(PYX):
    try:
        from Cython.Build import cythonize

        extensions = cythonize(
            [
                Extension(
                    "marchsim._kernels",
                    [PYX],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        # The compiled core is optional; the package falls back to the
        # pure Python simulation loop when the extension is unavailable.
        extensions = []

setup(ext_modules=extensions)

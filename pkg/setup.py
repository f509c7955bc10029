import os

import numpy as np
from setuptools import Extension, setup

extra = ["/O2"] if os.name == "nt" else ["-O3"]

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; kernels fall back at import
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "ergolab._ckernels",
                sources=["src/ergolab/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=extra,
            )
        ],
        language_level="3",
    )

setup(ext_modules=ext_modules)

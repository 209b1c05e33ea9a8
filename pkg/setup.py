import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

ext_module = Extension(
    "shaptopk._kernels",
    ["src/shaptopk/_kernels.pyx"],
    include_dirs=[np.get_include()],
)

setup(ext_modules=cythonize(ext_module, language_level=3))

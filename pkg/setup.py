import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    # The pure-Python kernels are used when the extension is unavailable.
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("hbft._kernels", ["src/hbft/_kernels.pyx"])],
        language_level=3,
    )

setup(ext_modules=ext_modules, include_dirs=[numpy.get_include()])

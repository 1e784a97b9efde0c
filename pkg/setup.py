"""Build script: compiles the envelope hot kernel when Cython is available.

The package works without the extension; envelope.py falls back to the pure
Python kernel at import time if the compiled module is missing.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/ftbalance/_envelope_kernel.pyx"],
        compiler_directives={"language_level": "3"},
    )
    include_dirs = [numpy.get_include()]
except ImportError:
    include_dirs = []

setup(ext_modules=ext_modules, include_dirs=include_dirs)

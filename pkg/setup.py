"""Build script for the optional compiled transition kernel.

The package is fully functional without the extension (a pure-Python
kernel is selected at import time); building it just makes planning
searches considerably faster.
"""

from setuptools import setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        ["src/pal/engine/_wfcore.pyx"],
        compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
    )

setup(ext_modules=ext_modules)

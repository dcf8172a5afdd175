"""Build hook for the optional compiled grid kernel.

The package is pure Python; if Cython is available at build time the
grid-enumeration hot loop is additionally compiled as ``faspc._gridcy``.
Everything works (more slowly) without it.
"""

import os

from setuptools import Extension, setup

PYX = "src/faspc/_gridcy.pyx"

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None and os.path.exists(PYX):
    extensions = cythonize([Extension("faspc._gridcy", [PYX])], language_level=3)
else:
    extensions = []

setup(ext_modules=extensions)

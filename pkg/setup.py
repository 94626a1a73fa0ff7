"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension: fleetflow.kernels
falls back to a pure-Python implementation when the compiled module is
missing. The extension is skipped (with a warning) if Cython or a C
compiler is unavailable so that source installs never hard-fail.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/fleetflow/kernels/_ckernels.pyx",
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "initializedcheck": False,
            "cdivision": True,
        },
    )
    for ext in ext_modules:
        ext.include_dirs.append(numpy.get_include())
except Exception as exc:  # pragma: no cover - build-env dependent
    sys.stderr.write(f"fleetflow: skipping compiled kernels ({exc})\n")
    ext_modules = []

setup(ext_modules=ext_modules)

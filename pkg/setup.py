"""Build script for the optional compiled kernel extension.

The package works without the extension (a pure NumPy fallback is selected
at import time), so a failed compile degrades gracefully instead of breaking
the install.
"""

import sys

from setuptools import setup


def _extensions():
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    ext = Extension(
        "seqprof.kernels._core",
        ["src/seqprof/kernels/_core.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


try:
    setup(ext_modules=_extensions())
except SystemExit:
    raise
except Exception as exc:  # compiler missing, bad toolchain, ...
    print(f"warning: compiled kernels unavailable ({exc}); "
          "installing with the pure NumPy backend only", file=sys.stderr)
    setup(ext_modules=[])

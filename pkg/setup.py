import os

from setuptools import Extension, setup

# The compiled core is optional: the package falls back to a pure-numpy
# implementation of the same routines when the extension is absent.
# Set HOLOFIELD_NO_EXT=1 to skip the build entirely.
ext_modules = []
if not os.environ.get("HOLOFIELD_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "holofield._core",
                    ["src/holofield/_core.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)

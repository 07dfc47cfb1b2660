import os

from setuptools import Extension, setup

# The compiled kernels are an optional speedup; the package falls back to
# the pure-Python engines when the extension is absent.  Set BTS_NO_EXT=1
# to skip the build (e.g. on a machine without a C toolchain).
ext_modules = []
if not os.environ.get("BTS_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "bts._speedups",
                    ["src/bts/_speedups.pyx"],
                    # -ffp-contract=off keeps double arithmetic bit-identical
                    # to the pure-Python backend (no FMA contraction).
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)

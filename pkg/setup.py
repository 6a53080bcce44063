"""Build script for the optional compiled sweep kernel.

Without Cython the package installs pure-Python only and
``wtsdist.kernels`` falls back to ``_pykernels``.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "wtsdist._kernels",
                ["src/wtsdist/_kernels.pyx"],
                extra_compile_args=["-O3", "-fopenmp"],
                extra_link_args=["-fopenmp"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)

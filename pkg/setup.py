from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "tkgbench._kernels._native",
                ["src/tkgbench/_kernels/_native.pyx"],
            )
        ],
        language_level="3",
    )
except ImportError:
    # Without Cython the package still works through the pure-Python kernels.
    ext_modules = []

setup(ext_modules=ext_modules)

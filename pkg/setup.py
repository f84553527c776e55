import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

# optional=True: a failed compile leaves the pure-numpy kernel in charge
extensions = [
    Extension(
        "zenoheom._heom_kernel",
        ["src/zenoheom/_heom_kernel.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3", "-fcx-limited-range"],
        optional=True,
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
)

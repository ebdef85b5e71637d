import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "spinn._core",
        ["src/spinn/_core.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        # a failed compile leaves the pure-Python fallback in charge
        optional=True,
    )
]

setup(
    ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}),
)

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []  # pure-Python fallback is selected at import time
else:
    ext_modules = cythonize(
        [
            Extension(
                "syncalg._kernel_c",
                ["src/syncalg/_kernel_c.pyx"],
                language="c++",
                extra_compile_args=["-O2"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)

from pathlib import Path

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

root = Path(__file__).resolve().parent
core_sources = sorted(f"src/{path.name}" for path in (root / "src").glob("*.cpp"))

ext = Pybind11Extension(
    "sage_curation._sage",
    sources=["bindings/sage_module.cpp"] + core_sources,
    include_dirs=["include", "vendor"],
    cxx_std=20,
)

setup(
    ext_modules=[ext],
    cmdclass={"build_ext": build_ext},
    packages=["sage_curation"],
    package_dir={"": "python"},
)

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

ext = Pybind11Extension(
    "humanoid_coa._core",
    sources=[
        "src/py/bindings.cpp",
        "src/action_lang.cpp",
        "src/scenario.cpp",
        "src/world.cpp",
        "src/scene_text.cpp",
        "src/coa_core.cpp",
        "src/llm_backend.cpp",
        "src/harness.cpp",
        "src/scenario_gen.cpp",
    ],
    include_dirs=["include", "vendor"],
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})

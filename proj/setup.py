import shutil
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        source_dir = Path(__file__).parent.resolve()
        build_dir = Path(self.build_temp).resolve()
        build_dir.mkdir(parents=True, exist_ok=True)

        cmakedir = subprocess.check_output(
            [sys.executable, "-m", "pybind11", "--cmakedir"], text=True
        ).strip()
        subprocess.check_call(
            [
                "cmake",
                str(source_dir),
                "-DFEDADMM_BUILD_TESTS=OFF",
                "-DFEDADMM_BUILD_CLI=OFF",
                "-DFEDADMM_BUILD_PYTHON=ON",
                f"-Dpybind11_DIR={cmakedir}",
                f"-DPYTHON_EXECUTABLE={sys.executable}",
                "-DCMAKE_BUILD_TYPE=Release",
            ],
            cwd=build_dir,
        )
        subprocess.check_call(["cmake", "--build", ".", "--target", "_core", "-j"], cwd=build_dir)

        produced = list((build_dir / "python" / "fedadmm").glob("_core*"))
        if not produced:
            raise RuntimeError("cmake did not produce the extension module")
        target = Path(self.get_ext_fullpath(ext.name))
        target.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(produced[0], target)


setup(
    ext_modules=[CMakeExtension("fedadmm._core")],
    cmdclass={"build_ext": CMakeBuild},
)

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
        source_dir = Path(__file__).resolve().parent
        build_dir = Path(self.build_temp) / "cmake"
        build_dir.mkdir(parents=True, exist_ok=True)

        cfg = "Debug" if self.debug else "Release"
        subprocess.run(
            [
                "cmake",
                "-S", str(source_dir),
                "-B", str(build_dir),
                f"-DCMAKE_BUILD_TYPE={cfg}",
                f"-DPython3_EXECUTABLE={sys.executable}",
                "-DRSTK_BUILD_PYTHON=ON",
                "-DRSTK_BUILD_CLI=OFF",
                "-DRSTK_BUILD_TESTS=OFF",
            ],
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", str(build_dir), "--target", "_rstk",
             "--parallel"],
            check=True,
        )

        produced = sorted((build_dir / "src").glob("_rstk.*so"))
        if not produced:
            raise RuntimeError("cmake did not produce the _rstk module")
        dest = Path(self.get_ext_fullpath(ext.name))
        dest.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(produced[-1], dest)


setup(
    ext_modules=[CMakeExtension("rstk._rstk")],
    cmdclass={"build_ext": CMakeBuild},
)

"""Make the smoke tests runnable without an installed wheel.

If prg_mnar is not importable, locate the CMake-built extension (under
$PRG_BUILD_DIR or ../../build) and wire it into the source package dir.
"""

import glob
import os
import shutil
import sys

ROOT = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


def _ensure_importable():
    try:
        import prg_mnar  # noqa: F401
        return
    except ImportError:
        pass

    search = [os.environ.get("PRG_BUILD_DIR"), os.path.join(ROOT, "build")]
    ext = None
    for base in search:
        if not base:
            continue
        hits = glob.glob(os.path.join(base, "_prg_mnar*.so"))
        if hits:
            ext = hits[0]
            break
    if ext is None:
        raise ImportError(
            "prg_mnar is not installed and no built _prg_mnar extension was "
            "found; build with cmake or set PRG_BUILD_DIR"
        )
    pkg_dir = os.path.join(ROOT, "python", "prg_mnar")
    target = os.path.join(pkg_dir, os.path.basename(ext))
    if not os.path.exists(target) or os.path.getmtime(target) < os.path.getmtime(ext):
        shutil.copy2(ext, target)
    sys.path.insert(0, os.path.join(ROOT, "python"))


_ensure_importable()

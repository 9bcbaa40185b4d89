"""Backend selection for the hot sampling kernels.

The compiled extension ``weylsim._kernels`` is preferred.  Setting
``WEYLSIM_PURE_PYTHON=1`` forces the numpy fallback, which is also used
automatically when the extension was not built.
"""
import os

from . import _kernels_py

_compiled = None
if os.environ.get("WEYLSIM_PURE_PYTHON") != "1":
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:  # pragma: no cover - depends on the build
        _compiled = None

if _compiled is not None:
    BACKEND = "cython"
    build_alias = _compiled.build_alias
    alias_draw = _compiled.alias_draw
    walk = _compiled.walk
else:
    BACKEND = "python"
    build_alias = _kernels_py.build_alias
    alias_draw = _kernels_py.alias_draw
    walk = _kernels_py.walk


def get_backend(name: str):
    """Return the kernel module named ``"cython"`` or ``"python"``."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not available")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def available_backends():
    return ["python"] + (["cython"] if _compiled is not None else [])

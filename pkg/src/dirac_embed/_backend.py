"""Pick the compiled kernels when available, else the pure-Python twin.

Set ``DIRAC_EMBED_PURE_PYTHON=1`` to force the fallback.
"""
import importlib
import os

from . import _pykernels

_compiled = None
if not os.environ.get("DIRAC_EMBED_PURE_PYTHON"):
    try:
        _compiled = importlib.import_module("dirac_embed._ckernels")
    except ImportError:
        _compiled = None

kernels = _compiled if _compiled is not None else _pykernels
BACKEND = "cython" if _compiled is not None else "python"


def get_kernels(name=None):
    """Return the kernel module for ``"cython"``, ``"python"`` or the default."""
    if name is None:
        return kernels
    if name == "python":
        return _pykernels
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def available_backends():
    return ["cython", "python"] if _compiled is not None else ["python"]

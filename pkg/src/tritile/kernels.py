"""Kernel backend selection.

The compiled extension is used when it imports; setting
``TRITILE_PURE_PYTHON=1`` forces the pure-Python fallback.
"""
import os

from . import _pykernels

FOUND = _pykernels.FOUND
EXHAUSTED = _pykernels.EXHAUSTED
OUT_OF_NODES = _pykernels.OUT_OF_NODES
OUT_OF_TIME = _pykernels.OUT_OF_TIME

_backend = _pykernels
BACKEND = "python"
if os.environ.get("TRITILE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _backend  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        pass

exact_cover_search = _backend.exact_cover_search
irregular_scan = _backend.irregular_scan


def backends() -> dict:
    """All importable backends by name (the fallback is always present)."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels

        out["cython"] = _ckernels
    except ImportError:
        pass
    return out

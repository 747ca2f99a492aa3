"""Kernel selection: compiled extension when importable, numpy otherwise.

Set ``STORAGEVALUE_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _kernels_py

try:
    if os.environ.get("STORAGEVALUE_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure python requested")
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

COMPILED = _compiled is not None
default = _compiled if COMPILED else _kernels_py


def get(compiled=None):
    """Return a kernel module; ``compiled=None`` means the import-time default."""
    if compiled is None:
        return default
    if compiled:
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        return _compiled
    return _kernels_py

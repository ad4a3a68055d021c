"""Numeric kernel selection.

The compiled kernel (advect2d._core, built from Cython) is preferred; the
pure-Python twin is the fallback.  ADVECT2D_BACKEND=c|python|auto forces a
choice; asking for "c" when the extension is missing is an import error
rather than a silent slowdown.
"""
import os

from . import _kernel_py


def _load():
    choice = os.environ.get("ADVECT2D_BACKEND", "auto").strip().lower()
    if choice not in ("auto", "c", "python"):
        raise ImportError(
            "ADVECT2D_BACKEND must be 'auto', 'c' or 'python', got %r" % choice
        )
    if choice in ("auto", "c"):
        try:
            from . import _core
            return _core
        except ImportError:
            if choice == "c":
                raise
    return _kernel_py


kernel = _load()


def backend_name():
    """Name of the active numeric kernel: 'c' or 'python'."""
    return kernel.BACKEND_NAME

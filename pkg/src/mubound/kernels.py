"""Kernel selection: the compiled extension if it was built, numpy otherwise.

Set ``MUBOUND_PURE=1`` in the environment to force the fallback.
"""

import os

from . import _fallback

if os.environ.get("MUBOUND_PURE", "") not in ("", "0"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

qseries = _impl.qseries
count_affine = _impl.count_affine

__all__ = ["BACKEND", "qseries", "count_affine", "_fallback"]

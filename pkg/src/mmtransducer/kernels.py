"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback. Set ``MMTRANSDUCER_BACKEND=python`` to force the fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
solve_batched = _pykernels.solve_batched

if os.environ.get("MMTRANSDUCER_BACKEND", "").lower() not in ("python", "py", "numpy"):
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        solve_batched = _ckernels.solve_batched
        BACKEND = "cython"

__all__ = ["BACKEND", "solve_batched"]

"""Kernel backend selection.

The compiled extension is used when it imports; otherwise (or when
MRSLE_BACKEND=python) the pure-Python mirror is used.  Both produce
bit-identical results.
"""
import os

from . import _pykernels

if os.environ.get("MRSLE_BACKEND", "").lower() == "python":
    kernels = _pykernels
    NAME = "python"
else:
    try:
        from . import _ckernels as kernels

        NAME = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        kernels = _pykernels
        NAME = "python"

OK = _pykernels.OK
GAP_COLLAPSE = _pykernels.GAP_COLLAPSE
SWALLOWED = _pykernels.SWALLOWED
BAD_INPUT = _pykernels.BAD_INPUT

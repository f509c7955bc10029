"""Kernel backend selection.

The compiled extension is preferred; set ``ERGOLAB_PURE=1`` to force the
numpy fallback (the test-suite runs both).
"""
import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("ERGOLAB_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        pass

block_codes = _impl.block_codes
block_counts = _impl.block_counts
sample_context_chain = _impl.sample_context_chain
sample_finite_chain = _impl.sample_finite_chain
sample_walk_chain = _impl.sample_walk_chain

BACKENDS = {"python": _pykernels}
try:
    from . import _ckernels

    BACKENDS["cython"] = _ckernels
except ImportError:
    pass

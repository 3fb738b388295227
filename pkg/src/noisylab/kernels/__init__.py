"""Kernel backend selection.

The compiled Cython backend is used when its extension module imported
successfully; otherwise the numpy fallback takes over. Override with the
environment variable NOISYLAB_KERNELS={auto,c,py} (read once at import).
`BACKEND` reports which implementation is live.
"""

import os

from . import _pykern

_requested = os.environ.get("NOISYLAB_KERNELS", "auto").strip().lower()
if _requested not in ("auto", "c", "py"):
    raise ValueError(
        f"NOISYLAB_KERNELS must be one of auto/c/py, got {_requested!r}"
    )

if _requested == "py":
    _impl = _pykern
    BACKEND = "python"
else:
    try:
        from . import _ckern as _impl
        BACKEND = "c"
    except ImportError:
        if _requested == "c":
            raise
        _impl = _pykern
        BACKEND = "python"

matmul = _impl.matmul
softmax_rows = _impl.softmax_rows
softmax_rows_grad = _impl.softmax_rows_grad
relu = _impl.relu
relu_grad = _impl.relu_grad
log_clamped = _impl.log_clamped
log_clamped_grad = _impl.log_clamped_grad

"""Kernel backend selection.

The compiled Cython backend is used when available; the pure-Python twin is
the fallback. Set TOPCITE_PURE_PYTHON=1 to force the fallback (used by the
benchmark and by tests that compare the two).
"""

import os

if os.environ.get("TOPCITE_PURE_PYTHON"):
    from . import _pure as _backend
else:
    try:
        from . import _speedups as _backend  # type: ignore[no-redef]
    except ImportError:
        from . import _pure as _backend  # type: ignore[no-redef]

BACKEND = _backend.NAME
random_walk = _backend.random_walk
sgns_train_chunk = _backend.sgns_train_chunk

__all__ = ["BACKEND", "random_walk", "sgns_train_chunk"]

"""Kernel lane selection: compiled extension when available, numpy fallback
otherwise. Set ADWAR_FORCE_PY_KERNELS=1 to force the fallback (used by the
benchmark and the lane-equivalence tests)."""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("ADWAR_FORCE_PY_KERNELS") == "1":
    _impl = _kernels_py
else:
    try:
        from . import _kernels_cy as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

LANE: str = _impl.LANE
best_ssd_match = _impl.best_ssd_match

__all__ = ["LANE", "best_ssd_match"]

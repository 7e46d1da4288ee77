"""Chain-kernel backend selection.

The hot Monte Carlo loop exists twice: a Cython extension (_chainkern) and
a NumPy fallback with identical semantics.  The compiled kernel is used
when importable unless EITCBS_BACKEND forces a choice ("compiled",
"numpy", or "auto").  Both consume the same pre-drawn variate blocks, so
they agree to floating-point reduction order.
"""
from __future__ import annotations

import os

from . import numpy_backend
from .numpy_backend import CHANNEL_ORDER, ChunkAccumulator
from .tables import PointTables, build_tables

__all__ = [
    "CHANNEL_ORDER",
    "ChunkAccumulator",
    "PointTables",
    "build_tables",
    "get_backend",
    "backend_name",
]

_compiled = None
_compiled_error = None
try:  # pragma: no cover - depends on the build environment
    from . import _chainkern as _compiled  # type: ignore[attr-defined]
except ImportError as exc:  # pragma: no cover
    _compiled_error = exc


def get_backend(name: str | None = None):
    """Return the kernel module implementing run_steady_chunk/run_fixed_path."""
    choice = name or os.environ.get("EITCBS_BACKEND", "auto")
    if choice == "numpy":
        return numpy_backend
    if choice == "compiled":
        if _compiled is None:
            raise RuntimeError(f"compiled kernel unavailable: {_compiled_error}")
        return _compiled
    if choice == "auto":
        return _compiled if _compiled is not None else numpy_backend
    raise ValueError(f"unknown backend {choice!r}")


def backend_name(name: str | None = None) -> str:
    return get_backend(name).BACKEND_NAME

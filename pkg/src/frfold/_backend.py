"""Pick the compiled kernels when available, else the pure-Python ones.

Set ``FRFOLD_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _pykernels

try:
    if os.environ.get("FRFOLD_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python backend forced")
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

BACKENDS = {"python": _pykernels}
if _compiled is not None:
    BACKENDS["compiled"] = _compiled

DEFAULT = "compiled" if _compiled is not None else "python"


def get(name: str | None = None):
    """Kernel module by name; ``None`` means the default for this install."""
    name = name or DEFAULT
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}") from None

"""Backend selection: compiled kernels when importable, pure Python otherwise.

The compiled extension accelerates the five fixed-budget estimators on games
with a dense worth table; results are bit-identical to the fallback.  Set the
environment variable ``SHAPTOPK_BACKEND`` to ``python`` to force the fallback
(benchmarking, debugging) or ``compiled`` to fail loudly if the extension is
missing; the default ``auto`` uses the extension when available.
"""

from __future__ import annotations

import os

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built; fall back to pure Python
    _compiled = None

_MODES = ("auto", "python", "compiled")
_mode = os.environ.get("SHAPTOPK_BACKEND", "auto")
if _mode not in _MODES:
    _mode = "auto"


def kernel_available() -> bool:
    return _compiled is not None


def set_backend(mode: str) -> None:
    """Select 'auto', 'python', or 'compiled' for subsequent runs."""
    global _mode
    if mode not in _MODES:
        raise ValueError(f"backend must be one of {_MODES}, got {mode!r}")
    if mode == "compiled" and _compiled is None:
        raise RuntimeError("compiled kernels are not available in this install")
    _mode = mode


def get_backend() -> str:
    return _mode


def active_kernels():
    """The compiled kernel module to use, or None for the Python fallback."""
    if _mode == "python":
        return None
    if _mode == "compiled" and _compiled is None:
        raise RuntimeError("compiled kernels are not available in this install")
    return _compiled

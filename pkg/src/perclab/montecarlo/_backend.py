"""Pick the compiled kernels when importable; ``PERCLAB_PURE_PYTHON=1`` forces the fallback."""

from __future__ import annotations

import os

from . import _pykernels

kernels = _pykernels
BACKEND = "python"

if os.environ.get("PERCLAB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:
        pass
    else:
        kernels = _kernels
        BACKEND = "cython"


def get_kernels(name: str | None = None):
    """Kernel module by name (``"python"`` or ``"cython"``); default is the selected one."""
    if name is None:
        return kernels
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _kernels  # type: ignore[attr-defined]

        return _kernels
    raise ValueError(f"unknown backend {name!r}")

"""Backend selection for the hot loops.

The compiled extension ``expconcave._kernels`` is used when importable;
otherwise, or when ``EXPCONCAVE_PURE_PYTHON`` is set to a non-empty value
other than ``0``, the numpy implementation in ``expconcave._fallback`` is
used. ``BACKEND`` names the active one.
"""
from __future__ import annotations

import os
from types import ModuleType

from . import _fallback


def _load_compiled() -> ModuleType | None:
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels


def get_backend(name: str) -> ModuleType:
    """Return the ``"cython"`` or ``"python"`` kernel module explicitly."""
    if name == "python":
        return _fallback
    if name == "cython":
        mod = _load_compiled()
        if mod is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        return mod
    raise ValueError(f"unknown backend {name!r}")


_compiled = None if os.environ.get("EXPCONCAVE_PURE_PYTHON", "0") not in ("", "0") else _load_compiled()
_impl = _compiled if _compiled is not None else _fallback
BACKEND = "cython" if _compiled is not None else "python"

project_ball = _impl.project_ball
rank_one_sequence = _impl.rank_one_sequence
ons_run = _impl.ons_run
ogd_run = _impl.ogd_run

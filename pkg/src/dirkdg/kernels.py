"""Backend selection for the hot kernels (stage residual and GMRES core).

The compiled extension is used when it imports; setting ``DIRKDG_BACKEND=python``
forces the numpy fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

_compiled = None
if os.environ.get("DIRKDG_BACKEND", "").lower() != "python":
    try:
        from . import _kernels as _compiled  # type: ignore[no-redef]
    except ImportError:  # extension not built
        _compiled = None

BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    BACKENDS["compiled"] = _compiled

BACKEND = "compiled" if _compiled is not None else "python"
residual = BACKENDS[BACKEND].residual
gmres_core = BACKENDS[BACKEND].gmres_core


def _module(name):
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}") from None


def get_residual(name: str | None = None):
    """The residual function of the named backend (default: the active one)."""
    return residual if name is None else _module(name).residual


def get_gmres(name: str | None = None):
    """The GMRES Arnoldi core of the named backend (default: the active one)."""
    return gmres_core if name is None else _module(name).gmres_core

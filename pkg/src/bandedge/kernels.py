"""Backend selection for the propagation hot loop.

The jit-compiled kernel is preferred whenever numba imports cleanly.
Set ``BANDEDGE_NUMBA=0`` (or ``numpy``/``false``/``off``) to force the
pure-numpy fallback, or ``BANDEDGE_NUMBA=1`` to insist on the compiled
path and fail loudly if it cannot be loaded.  Both backends implement
the same ``run_schedule`` contract; ``benchmarks/kernel_benchmark.py``
compares their speed and agreement.
"""

from __future__ import annotations

import os

__all__ = ["run_schedule", "backend_name", "BACKEND_ENV_VAR"]

BACKEND_ENV_VAR = "BANDEDGE_NUMBA"

_requested = os.environ.get(BACKEND_ENV_VAR, "").strip().lower()
if _requested in ("0", "false", "off", "numpy"):
    _use_numba = False
elif _requested in ("1", "true", "on", "numba"):
    from . import _kernels_numba as _backend

    _use_numba = True
else:
    try:
        from . import _kernels_numba as _backend

        _use_numba = True
    except ImportError:
        _use_numba = False

if not _use_numba:
    from . import _kernels_numpy as _backend


def backend_name() -> str:
    """Name of the active propagation backend ('numba' or 'numpy')."""
    return "numba" if _use_numba else "numpy"


def run_schedule(*args):
    return _backend.run_schedule(*args)

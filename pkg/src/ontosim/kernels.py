"""Backend selector for the hot interpolation kernels.

The compiled extension is preferred; the numpy implementation is the
fallback, selected automatically when the extension is missing or forced
with ``ONTOSIM_PURE_PYTHON=1``. ``BACKEND`` records which one is active.
Both backends implement the same functions with matching semantics (see
``benchmarks/bench_kernels.py`` for a speed comparison and
``tests/test_kernels.py`` for the agreement check).
"""

from __future__ import annotations

import os

from . import _kernels_np

if os.environ.get("ONTOSIM_PURE_PYTHON", "") == "1":
    _impl = _kernels_np
    BACKEND = "numpy"
else:
    try:
        from . import _kernels_c as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - build-environment dependent
        _impl = _kernels_np
        BACKEND = "numpy"

interp_periodic = _impl.interp_periodic
velocity_at = _impl.velocity_at

__all__ = ["interp_periodic", "velocity_at", "BACKEND"]

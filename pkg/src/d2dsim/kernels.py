"""Kernel backend selection.

Imports the compiled extension when available, otherwise the pure-Python
fallback. Set D2DSIM_PURE_PYTHON=1 to force the fallback (used by the
benchmark and the backend-equivalence tests). Both backends return
bit-identical doubles.
"""

import os

if os.environ.get("D2DSIM_PURE_PYTHON") == "1":
    from d2dsim import _kernels_py as _impl
else:
    try:
        from d2dsim import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from d2dsim import _kernels_py as _impl

BACKEND = _impl.BACKEND

path_loss_db = _impl.path_loss_db
gain = _impl.gain
sector_points = _impl.sector_points
greedy_pairs = _impl.greedy_pairs
gain_matrix = _impl.gain_matrix
sector_wedges = _impl.sector_wedges
cotier_sum = _impl.cotier_sum

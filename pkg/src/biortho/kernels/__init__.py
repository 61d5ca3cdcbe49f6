"""Numeric kernels with a switchable backend.

The environment variable ``BIORTHO_KERNELS`` selects the implementation:

* ``numba`` -- compiled loops (raises if numba is unavailable),
* ``numpy`` -- pure numpy fallback,
* ``auto`` or unset -- numba when importable, numpy otherwise.

Both backends are bitwise compatible, see ``_numpy`` for the contract.
``BACKEND`` records which one is active in this process.
"""

import os

_requested = os.environ.get("BIORTHO_KERNELS", "auto").strip().lower() or "auto"
if _requested not in ("auto", "numba", "numpy"):
    raise ValueError(
        "BIORTHO_KERNELS must be 'numba', 'numpy' or 'auto', got %r" % _requested
    )

if _requested == "numpy":
    from . import _numpy as _impl

    BACKEND = "numpy"
elif _requested == "numba":
    from . import _numba as _impl

    BACKEND = "numba"
else:
    try:
        from . import _numba as _impl

        BACKEND = "numba"
    except ImportError:
        from . import _numpy as _impl

        BACKEND = "numpy"

dot_w = _impl.dot_w
row_dots = _impl.row_dots
row_norms_sq = _impl.row_norms_sq
weighted_gram = _impl.weighted_gram
mgs_residual = _impl.mgs_residual
combine_rows = _impl.combine_rows
grow_duals = _impl.grow_duals
drop_dual = _impl.drop_dual

__all__ = [
    "BACKEND",
    "dot_w",
    "row_dots",
    "row_norms_sq",
    "weighted_gram",
    "mgs_residual",
    "combine_rows",
    "grow_duals",
    "drop_dual",
]

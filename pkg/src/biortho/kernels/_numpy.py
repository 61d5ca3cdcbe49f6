"""Pure numpy kernel implementations.

Each function has a compiled twin in ``._numba`` with identical floating
point semantics: sums accumulate in ascending index order and every
scalar/vector operation associates the same way.  The two backends therefore
return bitwise identical results for identical inputs, which is what makes
the backend switch safe for reproducibility guarantees.
"""

import numpy as np


def dot_w(w, a, b):
    """Weighted dot product ``sum_k w[k]*(a[k]*b[k])`` accumulated in ascending k."""
    # np.cumsum is strictly sequential; np.sum would use pairwise reduction.
    return float(np.cumsum(w * (a * b))[-1])


def row_dots(w, rows, v):
    """Weighted dot of each row of ``rows`` against ``v``."""
    out = np.empty(rows.shape[0])
    for n in range(rows.shape[0]):
        out[n] = dot_w(w, rows[n], v)
    return out


def row_norms_sq(w, rows):
    """Weighted squared norm of each row."""
    out = np.empty(rows.shape[0])
    for n in range(rows.shape[0]):
        out[n] = dot_w(w, rows[n], rows[n])
    return out


def weighted_gram(w, rows):
    """Weighted Gram matrix of the rows; exactly symmetric by construction."""
    n = rows.shape[0]
    g = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            g[i, j] = dot_w(w, rows[i], rows[j])
            g[j, i] = g[i, j]
    return g


def mgs_residual(w, basis, v):
    """Residual of ``v`` after sequentially removing the orthonormal rows of ``basis``.

    Projections are subtracted one row at a time from the running residual
    (modified Gram-Schmidt), in ascending row order.
    """
    r = v.copy()
    for n in range(basis.shape[0]):
        q = basis[n]
        r = r - q * dot_w(w, q, r)
    return r


def combine_rows(c, rows):
    """Linear combination ``sum_n c[n]*rows[n]`` accumulated in ascending n."""
    out = np.zeros(rows.shape[1])
    for n in range(rows.shape[0]):
        out = out + c[n] * rows[n]
    return out


def grow_duals(duals, g, resid, resid_norm_sq):
    """Dual family update when one atom is appended.

    ``g[n]`` is the weighted dot of the new atom against dual row ``n`` and
    ``resid`` is the new atom's component orthogonal to the current span.
    Every old dual is corrected by a multiple of ``resid`` and the new dual
    is ``resid`` scaled by its squared norm.
    """
    k, dim = duals.shape
    out = np.empty((k + 1, dim))
    for n in range(k):
        s = g[n] / resid_norm_sq
        out[n] = duals[n] - s * resid
    out[k] = resid / resid_norm_sq
    return out


def drop_dual(duals, g, drop, drop_norm_sq):
    """Dual family update when row ``drop`` is removed.

    ``g[n]`` is the weighted dot of dual row ``drop`` against dual row ``n``
    and ``drop_norm_sq`` its squared norm.  Each survivor sheds its component
    along the dropped dual, which restores biorthogonality on the smaller set.
    """
    n_rows, dim = duals.shape
    u = duals[drop]
    out = np.empty((n_rows - 1, dim))
    m = 0
    for n in range(n_rows):
        if n == drop:
            continue
        s = g[n] / drop_norm_sq
        out[m] = duals[n] - s * u
        m += 1
    return out

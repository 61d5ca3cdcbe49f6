"""Numba-compiled kernel implementations.

Same contracts as :mod:`biortho.kernels._numpy`.  Loops are written so the
floating point operation order matches the numpy fallback exactly; no
fastmath, no parallel reductions.  ``cache=True`` persists the compiled
machine code next to the package so warmup is paid once per environment.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def dot_w(w, a, b):
    s = 0.0
    for k in range(w.shape[0]):
        s += w[k] * (a[k] * b[k])
    return s


@njit(cache=True)
def row_dots(w, rows, v):
    out = np.empty(rows.shape[0])
    for n in range(rows.shape[0]):
        out[n] = dot_w(w, rows[n], v)
    return out


@njit(cache=True)
def row_norms_sq(w, rows):
    out = np.empty(rows.shape[0])
    for n in range(rows.shape[0]):
        out[n] = dot_w(w, rows[n], rows[n])
    return out


@njit(cache=True)
def weighted_gram(w, rows):
    n = rows.shape[0]
    g = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            g[i, j] = dot_w(w, rows[i], rows[j])
            g[j, i] = g[i, j]
    return g


@njit(cache=True)
def mgs_residual(w, basis, v):
    r = v.copy()
    for n in range(basis.shape[0]):
        c = dot_w(w, basis[n], r)
        for k in range(r.shape[0]):
            r[k] = r[k] - basis[n, k] * c
    return r


@njit(cache=True)
def combine_rows(c, rows):
    out = np.zeros(rows.shape[1])
    for n in range(rows.shape[0]):
        cn = c[n]
        for k in range(rows.shape[1]):
            out[k] = out[k] + cn * rows[n, k]
    return out


@njit(cache=True)
def grow_duals(duals, g, resid, resid_norm_sq):
    k = duals.shape[0]
    dim = duals.shape[1]
    out = np.empty((k + 1, dim))
    for n in range(k):
        s = g[n] / resid_norm_sq
        for i in range(dim):
            out[n, i] = duals[n, i] - s * resid[i]
    for i in range(dim):
        out[k, i] = resid[i] / resid_norm_sq
    return out


@njit(cache=True)
def drop_dual(duals, g, drop, drop_norm_sq):
    n_rows = duals.shape[0]
    dim = duals.shape[1]
    out = np.empty((n_rows - 1, dim))
    m = 0
    for n in range(n_rows):
        if n == drop:
            continue
        s = g[n] / drop_norm_sq
        for i in range(dim):
            out[m, i] = duals[n, i] - s * duals[drop, i]
        m += 1
    return out

"""Reference route: duals and projections via a direct Gram solve.

Everything the recursive machinery produces can also be computed by solving
the (symmetric positive definite) Gram system with a Cholesky factorization.
This module is the slow-but-independent cross-check used by the test suite
and the conditioning report in the command line tool; it shares no update
logic with :mod:`biortho.forward` or :mod:`biortho.backward`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from . import kernels
from .dictionary import Dictionary, remove_atom
from .errors import GridMismatch, SingularGram
from .forward import Approximation, DualState, _make_state, _readonly
from .space import Signal

__all__ = [
    "GramSystem",
    "gram_system",
    "oracle_duals",
    "oracle_project",
    "oracle_best_removal",
]

# Cholesky pivots whose square falls below this times max |G| mean the Gram
# matrix is numerically singular even if the factorization went through.
_PIVOT_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class GramSystem:
    """Weighted Gram matrix of the atoms plus a 2-norm condition estimate."""

    gram: np.ndarray
    condition_estimate: float


def gram_system(dictionary: Dictionary) -> GramSystem:
    """Assemble the Gram matrix; exactly symmetric by construction."""
    w = dictionary.grid.weights
    g = kernels.weighted_gram(w, dictionary.values)
    cond = float(np.linalg.cond(g))
    return GramSystem(_readonly(g), cond)


def _factor(g: np.ndarray):
    try:
        c, low = cho_factor(g, lower=True)
    except LinAlgError as exc:
        raise SingularGram(f"Gram matrix is not positive definite: {exc}") from None
    pivots = np.diag(c)
    if float(np.min(pivots)) ** 2 <= _PIVOT_FLOOR * float(np.max(np.abs(g))):
        raise SingularGram(
            f"Gram matrix is numerically singular "
            f"(smallest Cholesky pivot {float(np.min(pivots)):.3g})"
        )
    return c, low


def oracle_duals(dictionary: Dictionary) -> DualState:
    """Duals from the inverse Gram matrix: dual_n = sum_m (G^-1)[n,m] atom_m."""
    gs = gram_system(dictionary)
    factor = _factor(gs.gram)
    inv = cho_solve(factor, np.eye(dictionary.n_atoms))
    duals = inv @ dictionary.values
    last_rn2 = 1.0 / float(kernels.dot_w(
        dictionary.grid.weights, duals[-1], duals[-1]
    ))
    return _make_state(dictionary, np.ascontiguousarray(duals), last_rn2, None)


def oracle_project(dictionary: Dictionary, f: Signal) -> Approximation:
    """Least-squares coefficients of ``f`` by solving the normal equations."""
    if f.grid != dictionary.grid:
        raise GridMismatch(
            f"signal grid {f.grid} differs from dictionary grid {dictionary.grid}"
        )
    w = dictionary.grid.weights
    gs = gram_system(dictionary)
    factor = _factor(gs.gram)
    b = kernels.row_dots(w, dictionary.values, f.values)
    coeffs = cho_solve(factor, b)
    recon = kernels.combine_rows(coeffs, dictionary.values)
    an2 = kernels.dot_w(w, recon, recon)
    return Approximation(_readonly(np.ascontiguousarray(coeffs)), float(an2), f)


def oracle_best_removal(dictionary: Dictionary, f: Signal) -> tuple[int, float]:
    """Exhaustively find the atom whose removal hurts the projection least.

    For every atom, re-projects ``f`` onto the remaining atoms from scratch
    and measures the squared norm of the change of the approximant.  Returns
    ``(atom_id, error_increase)``; exact ties pick the lowest id.  Requires
    at least 2 atoms.
    """
    if dictionary.n_atoms < 2:
        raise ValueError("need at least 2 atoms to compare removals")
    w = dictionary.grid.weights
    full = oracle_project(dictionary, f)
    full_recon = kernels.combine_rows(full.coeffs, dictionary.values)
    best_id = None
    best_err = np.inf
    for atom in dictionary.atoms:
        reduced = remove_atom(dictionary, atom.id)
        part = oracle_project(reduced, f)
        part_recon = kernels.combine_rows(part.coeffs, reduced.values)
        diff = full_recon - part_recon
        err = float(kernels.dot_w(w, diff, diff))
        if err < best_err or (err == best_err and atom.id < best_id):
            best_id, best_err = atom.id, err
    return best_id, best_err

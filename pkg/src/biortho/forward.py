"""Forward construction of biorthogonal duals, one atom at a time.

Growing an active set by one atom only requires the atom's component
orthogonal to the current span.  Every existing dual is corrected by a
multiple of that component and the new dual is the component itself,
rescaled.  The orthogonal component comes from modified Gram-Schmidt against
an orthonormal basis of the span that the state carries along.

Expansion coefficients of a fixed signal admit the same one-atom update, so
a least-squares fit can be grown without ever solving a linear system.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from . import kernels
from .dictionary import Atom, Dictionary
from .errors import GridMismatch, LinearlyDependent
from .jsonfmt import dump
from .space import Signal

__all__ = [
    "DualState",
    "Approximation",
    "init_duals",
    "add_atom",
    "add_atom_with_coeffs",
    "build_duals",
    "fit",
    "reconstruct",
    "residual_norm_sq",
    "dual_state_to_json",
    "save_dual_state_json",
]

# Relative residual below which a new atom counts as dependent.
DEFAULT_DEP_TOL = 1e-8

# Floor used when re-orthonormalizing the active atoms after removals.
_REBUILD_FLOOR = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DualState:
    """Biorthogonal duals of the active atoms.

    ``dual_values[n]`` holds the dual of ``dictionary.atoms[n]``; the pairing
    ``inner(dual_n, atom_m)`` is the identity within roundoff.  ``ortho`` is
    an orthonormal basis of the active span used to grow the state; it is
    dropped (set to None) by removals and rebuilt lazily on the next growth.
    ``last_residual_norm_sq`` tracks the squared norm of the most recent
    orthogonal component, a cheap conditioning diagnostic.
    """

    dictionary: Dictionary
    dual_values: np.ndarray
    dual_norm_sq: np.ndarray
    last_residual_norm_sq: float
    ortho: np.ndarray | None = None

    @property
    def n_atoms(self) -> int:
        return self.dictionary.n_atoms

    @property
    def grid(self):
        return self.dictionary.grid

    @property
    def duals(self) -> tuple[Signal, ...]:
        """The dual family as signals, aligned with ``dictionary.atoms``."""
        g = self.grid
        return tuple(Signal(g, self.dual_values[n]) for n in range(self.n_atoms))


@dataclass(frozen=True, eq=False)
class Approximation:
    """Expansion coefficients of a signal over the active atoms.

    ``coeffs[n]`` multiplies ``dictionary.atoms[n]``; ``approx_norm_sq`` is
    the squared weighted norm of the reconstruction; ``signal_ref`` is the
    signal that was fitted.
    """

    coeffs: np.ndarray
    approx_norm_sq: float
    signal_ref: Signal


def _make_state(dictionary, duals, last_rn2, ortho) -> DualState:
    w = dictionary.grid.weights
    return DualState(
        dictionary=dictionary,
        dual_values=_readonly(duals),
        dual_norm_sq=_readonly(kernels.row_norms_sq(w, duals)),
        last_residual_norm_sq=float(last_rn2),
        ortho=None if ortho is None else _readonly(ortho),
    )


def init_duals(dictionary: Dictionary, first_atom_index: int = 1) -> DualState:
    """Single-atom state over the atom at 1-based position ``first_atom_index``.

    The lone dual is the atom divided by its squared norm, so the pairing
    starts out exact.
    """
    if not 1 <= first_atom_index <= dictionary.n_atoms:
        raise ValueError(
            f"first_atom_index must be in 1..{dictionary.n_atoms}, "
            f"got {first_atom_index}"
        )
    atom = dictionary.atoms[first_atom_index - 1]
    w = dictionary.grid.weights
    a = atom.signal.values
    an2 = kernels.dot_w(w, a, a)
    if an2 <= 0.0:
        raise LinearlyDependent(f"atom id {atom.id} has zero norm")
    duals = (a / an2)[None, :].copy()
    ortho = (a / sqrt(an2))[None, :].copy()
    return _make_state(Dictionary((atom,)), duals, an2, ortho)


def _orthonormal_basis(w: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Modified Gram-Schmidt orthonormalization of the rows."""
    basis = np.empty_like(rows)
    for n in range(rows.shape[0]):
        r = kernels.mgs_residual(w, basis[:n], rows[n])
        rn2 = kernels.dot_w(w, r, r)
        an2 = kernels.dot_w(w, rows[n], rows[n])
        if rn2 <= (_REBUILD_FLOOR**2) * an2:
            raise LinearlyDependent(
                f"active atom at position {n + 1} is dependent on its predecessors"
            )
        basis[n] = r / sqrt(rn2)
    return basis


def _ensure_ortho(state: DualState) -> np.ndarray:
    if state.ortho is not None:
        return state.ortho
    return _orthonormal_basis(state.grid.weights, state.dictionary.values)


def _advance(state: DualState, new_atom: Atom, dep_tol: float):
    """Shared growth step: returns (new_state, g, resid_dot_f_hook).

    ``g[n] = inner(new_atom, dual_n)`` and the returned closure evaluates
    ``inner(resid, f) / resid_norm_sq`` for the coefficient update.
    """
    if new_atom.signal.grid != state.grid:
        raise GridMismatch(
            f"new atom id {new_atom.id} is on {new_atom.signal.grid}, "
            f"expected {state.grid}"
        )
    if new_atom.id in state.dictionary.ids:
        raise ValueError(f"atom id {new_atom.id} is already active")
    w = state.grid.weights
    a = new_atom.signal.values
    ortho = _ensure_ortho(state)
    resid = kernels.mgs_residual(w, ortho, a)
    rn2 = kernels.dot_w(w, resid, resid)
    an2 = kernels.dot_w(w, a, a)
    if sqrt(max(rn2, 0.0)) <= dep_tol * sqrt(an2):
        raise LinearlyDependent(
            f"atom id {new_atom.id} lies in the active span "
            f"(residual/atom norm ratio {sqrt(max(rn2, 0.0)) / sqrt(an2):.3g} "
            f"<= dep_tol {dep_tol:g})"
        )
    g = kernels.row_dots(w, state.dual_values, a)
    duals = kernels.grow_duals(state.dual_values, g, resid, rn2)
    new_dict = Dictionary(state.dictionary.atoms + (new_atom,))
    new_ortho = np.vstack([ortho, (resid / sqrt(rn2))[None, :]])
    new_state = _make_state(new_dict, duals, rn2, new_ortho)

    def last_coeff_of(f_values: np.ndarray) -> float:
        return kernels.dot_w(w, resid, f_values) / rn2

    return new_state, g, last_coeff_of


def add_atom(state: DualState, new_atom: Atom, dep_tol: float = DEFAULT_DEP_TOL) -> DualState:
    """Grow the dual family by one atom.

    Raises
    ------
    LinearlyDependent
        If the atom's orthogonal residual norm is at most ``dep_tol`` times
        its own norm.
    GridMismatch
        If the atom lives on a different grid.
    """
    new_state, _, _ = _advance(state, new_atom, dep_tol)
    return new_state


def add_atom_with_coeffs(
    state: DualState,
    approx: Approximation,
    new_atom: Atom,
    dep_tol: float = DEFAULT_DEP_TOL,
):
    """Grow the duals and carry the fitted coefficients along in one step.

    Every old coefficient sheds a multiple of the new atom's residual
    coefficient; the fit stays the orthogonal projection without touching
    the signal again beyond one inner product.
    Returns ``(new_state, new_approx)``.
    """
    new_state, g, last_coeff_of = _advance(state, new_atom, dep_tol)
    f = approx.signal_ref
    c_last = last_coeff_of(f.values)
    coeffs = np.empty(state.n_atoms + 1)
    coeffs[: state.n_atoms] = approx.coeffs - g * c_last
    coeffs[state.n_atoms] = c_last
    w = state.grid.weights
    recon = kernels.combine_rows(coeffs, new_state.dictionary.values)
    an2 = kernels.dot_w(w, recon, recon)
    return new_state, Approximation(_readonly(coeffs), float(an2), f)


def build_duals(
    dictionary: Dictionary,
    dep_tol: float = DEFAULT_DEP_TOL,
    pivot: bool = False,
) -> DualState:
    """Duals for a whole dictionary by repeated growth.

    With ``pivot=True`` atoms are processed in order of decreasing orthogonal
    residual norm (a rank-revealing order that postpones near-dependent
    atoms); the returned rows are rearranged back to dictionary order either
    way, so the result spans and pairs identically.
    """
    if not pivot:
        state = init_duals(dictionary, 1)
        for atom in dictionary.atoms[1:]:
            state = add_atom(state, atom, dep_tol)
        return state

    w = dictionary.grid.weights
    rows = dictionary.values
    n = dictionary.n_atoms
    resid = rows.copy()
    remaining = list(range(n))
    order: list[int] = []
    while remaining:
        norms = [kernels.dot_w(w, resid[i], resid[i]) for i in remaining]
        pick = remaining[int(np.argmax(norms))]
        rn2 = kernels.dot_w(w, resid[pick], resid[pick])
        an2 = kernels.dot_w(w, rows[pick], rows[pick])
        if sqrt(max(rn2, 0.0)) <= dep_tol * sqrt(an2):
            raise LinearlyDependent(
                f"atom id {dictionary.atoms[pick].id} lies in the span of "
                f"the atoms already processed"
            )
        q = resid[pick] / sqrt(rn2)
        order.append(pick)
        remaining.remove(pick)
        for i in remaining:
            resid[i] = resid[i] - q * kernels.dot_w(w, q, resid[i])

    permuted = Dictionary(tuple(dictionary.atoms[i] for i in order))
    state = init_duals(permuted, 1)
    for atom in permuted.atoms[1:]:
        state = add_atom(state, atom, dep_tol)
    inv = np.argsort(np.array(order))
    duals = state.dual_values[inv].copy()
    return _make_state(dictionary, duals, state.last_residual_norm_sq, state.ortho.copy())


def fit(state: DualState, f: Signal) -> Approximation:
    """Orthogonal projection of ``f`` onto the active span.

    Coefficients are the inner products of ``f`` with the duals, which is
    the least-squares solution; the residual is orthogonal to every active
    atom.
    """
    if f.grid != state.grid:
        raise GridMismatch(f"signal grid {f.grid} differs from state grid {state.grid}")
    w = state.grid.weights
    coeffs = kernels.row_dots(w, state.dual_values, f.values)
    recon = kernels.combine_rows(coeffs, state.dictionary.values)
    an2 = kernels.dot_w(w, recon, recon)
    return Approximation(_readonly(coeffs), float(an2), f)


def reconstruct(state: DualState, approx: Approximation) -> Signal:
    """The approximant ``sum_n coeffs[n] * atom_n`` as a signal."""
    if approx.coeffs.shape[0] != state.n_atoms:
        raise ValueError(
            f"approximation has {approx.coeffs.shape[0]} coefficients, "
            f"state has {state.n_atoms} atoms"
        )
    return Signal(
        state.grid, kernels.combine_rows(approx.coeffs, state.dictionary.values)
    )


def residual_norm_sq(state: DualState, approx: Approximation) -> float:
    """Squared weighted norm of ``signal_ref`` minus the approximant."""
    w = state.grid.weights
    diff = approx.signal_ref.values - reconstruct(state, approx).values
    return float(kernels.dot_w(w, diff, diff))


def dual_state_to_json(state: DualState) -> dict:
    """JSON-ready dict: grid, atom ids, dual value arrays, dual norms."""
    g = state.grid
    return {
        "grid": {"t_min": g.t_min, "t_max": g.t_max, "n_points": g.n_points},
        "atom_ids": list(state.dictionary.ids),
        "duals": [state.dual_values[n] for n in range(state.n_atoms)],
        "dual_norm_sq": state.dual_norm_sq,
    }


def save_dual_state_json(state: DualState, path) -> None:
    dump(dual_state_to_json(state), path)

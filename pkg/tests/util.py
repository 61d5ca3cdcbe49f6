"""Shared helpers for the test suite."""

import numpy as np

from biortho import Atom, Dictionary, Grid, Signal, gram_system


def rel_fro(a, b):
    """Frobenius distance of a from b, relative to the size of b."""
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    denom = max(float(np.linalg.norm(b)), 1e-300)
    return float(np.linalg.norm(a - b)) / denom


def projector_matrix(state):
    """Dense matrix of the oblique-free projection onto the active span.

    Built directly from the state: P maps sample vectors v to
    sum_n atoms[n] * inner(dual_n, v).
    """
    w = state.grid.weights
    atoms = state.dictionary.values
    duals = state.dual_values
    return atoms.T @ (duals * w[None, :])


def projector_deviations(state):
    """(idempotency, weighted self-adjointness) deviations in Frobenius norm."""
    p = projector_matrix(state)
    idem = float(np.linalg.norm(p @ p - p))
    w = state.grid.weights
    wp = w[:, None] * p
    adj = float(np.linalg.norm(wp - wp.T))
    return idem, adj


def minimizer_set(ids, values, rel_tol=1e-10):
    """Ids whose value is within rel_tol (relative) of the smallest value."""
    values = np.asarray(values, dtype=np.float64)
    vmin = float(np.min(values))
    cut = vmin + rel_tol * max(abs(vmin), 1e-300)
    return {i for i, v in zip(ids, values) if float(v) <= cut}


def block_dictionary(n_atoms=3, block=4, heights=None):
    """Atoms with disjoint supports: exactly orthogonal under the weights."""
    n = n_atoms * block
    grid = Grid(0.0, 1.0, n)
    w = grid.weights
    atoms = []
    for i in range(n_atoms):
        v = np.zeros(n)
        h = 1.0 if heights is None else heights[i]
        v[i * block : (i + 1) * block] = h
        nrm = np.sqrt(float(np.sum(w * v * v)))
        atoms.append(Atom(i + 1, Signal(grid, v / nrm), f"block{i + 1}"))
    return Dictionary(tuple(atoms))


def sixty_degree_pair():
    """Two unit atoms whose inner product is exactly 1/2 up to roundoff."""
    d = block_dictionary(2, 8)
    q1 = d.atoms[0].signal.values
    q2 = d.atoms[1].signal.values
    grid = d.grid
    u = Atom(1, Signal(grid, q1), "u")
    v = Atom(2, Signal(grid, 0.5 * q1 + (np.sqrt(3.0) / 2.0) * q2), "v")
    return Dictionary((u, v))


def random_dictionary(rng, n_atoms, n_points, coherent=False, max_cond=1e6):
    """Random normalized atoms on [0, 1]; Gram condition kept below max_cond.

    With coherent=True every atom shares a common component, which raises
    the mutual overlap without (usually) breaking the condition cap; draws
    that break it are retried.
    """
    grid = Grid(0.0, 1.0, n_points)
    for _ in range(50):
        base = rng.standard_normal(n_points)
        rows = rng.standard_normal((n_atoms, n_points))
        if coherent:
            rows = rows + 1.5 * base[None, :]
        atoms = []
        for i in range(n_atoms):
            v = rows[i]
            sig = Signal(grid, v)
            nrm2 = float(np.dot(grid.weights, sig.values * sig.values))
            atoms.append(
                Atom(i + 1, Signal(grid, sig.values / np.sqrt(nrm2)), f"rand{i + 1}")
            )
        d = Dictionary(tuple(atoms))
        if gram_system(d).condition_estimate <= max_cond:
            return d
    raise RuntimeError("could not draw a well-conditioned random dictionary")


def random_signal(rng, grid):
    return Signal(grid, rng.standard_normal(grid.n_points))

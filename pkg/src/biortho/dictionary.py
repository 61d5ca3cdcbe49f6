"""Atom dictionaries: ordered families of named, normalized signals.

Atoms carry a stable integer id assigned at construction; removals never
renumber survivors.  The module also ships the Mexican hat generator and the
13-atom demo dictionary used throughout the docs and the command line tool.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import sqrt

import numpy as np

from . import kernels
from .errors import DegenerateAtom, GridMismatch, LastAtom, ParseError, UnknownAtom
from .space import Grid, Signal, grid_from_samples

__all__ = [
    "Atom",
    "Dictionary",
    "mexican_hat_dictionary",
    "demo_dictionary",
    "demo_signal",
    "remove_atom",
    "save_dictionary_csv",
    "load_dictionary_csv",
    "DEMO_CENTERS",
    "DEMO_COEFFS",
]

# Atoms whose pre-normalization norm falls below this are rejected.
_DEGENERACY_FLOOR = 1e-12

# Demo dictionary: Mexican hat atoms centered at 0, +-1, ..., +-6, listed
# center 0 first and then outward with the positive center before the
# negative one.  DEMO_COEFFS are the matching expansion coefficients of the
# bundled demo signal.
DEMO_CENTERS = (0.0, 1.0, -1.0, 2.0, -2.0, 3.0, -3.0, 4.0, -4.0, 5.0, -5.0, 6.0, -6.0)
DEMO_COEFFS = (
    2.8273,
    2.4954,
    2.4954,
    1.9988,
    1.9988,
    1.4989,
    1.4989,
    0.8630,
    0.8630,
    0.2957,
    0.2957,
    0.0648,
    0.0648,
)


@dataclass(frozen=True)
class Atom:
    """A unit-norm signal with a stable id and a human-readable label."""

    id: int
    signal: Signal
    label: str


@dataclass(frozen=True, eq=False)
class Dictionary:
    """Non-empty ordered tuple of atoms sharing one grid, ids unique."""

    atoms: tuple[Atom, ...]

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        if not self.atoms:
            raise ValueError("dictionary must hold at least one atom")
        grid = self.atoms[0].signal.grid
        for a in self.atoms:
            if a.signal.grid != grid:
                raise GridMismatch(
                    f"atom id {a.id} is on {a.signal.grid}, expected {grid}"
                )
        ids = [a.id for a in self.atoms]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate atom ids: {sorted(ids)}")

    @property
    def grid(self) -> Grid:
        return self.atoms[0].signal.grid

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(a.id for a in self.atoms)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(a.label for a in self.atoms)

    @cached_property
    def values(self) -> np.ndarray:
        """Atom samples stacked as rows, shape ``(n_atoms, n_points)``, read-only."""
        m = np.stack([a.signal.values for a in self.atoms])
        m.setflags(write=False)
        return m

    def index_of(self, atom_id: int) -> int:
        """Position of the atom with the given id; raises UnknownAtom."""
        for pos, a in enumerate(self.atoms):
            if a.id == atom_id:
                return pos
        raise UnknownAtom(f"no active atom with id {atom_id} (active: {self.ids})")

    def atom(self, atom_id: int) -> Atom:
        return self.atoms[self.index_of(atom_id)]


def _mexhat_samples(t: np.ndarray, center: float) -> np.ndarray:
    s = t - center
    return np.exp(-s * s) * (1.0 - s * s)


def mexican_hat_dictionary(grid: Grid, centers) -> Dictionary:
    """Mexican hat atoms at the given centers, normalized on the grid.

    Each atom samples ``exp(-(t-c)^2) * (1 - (t-c)^2)`` and is scaled to unit
    weighted norm.  Ids run 1..len(centers) in the order given.

    Raises
    ------
    DegenerateAtom
        If an atom's pre-normalization norm is below 1e-12 (the center is
        too far outside the grid).
    """
    centers = [float(c) for c in centers]
    if not centers:
        raise ValueError("need at least one center")
    w = grid.weights
    atoms = []
    for i, c in enumerate(centers):
        raw = _mexhat_samples(grid.t, c)
        nrm = sqrt(kernels.dot_w(w, raw, raw))
        if nrm < _DEGENERACY_FLOOR:
            raise DegenerateAtom(
                f"mexican hat centered at {c:g} has norm {nrm:.3g} on {grid}"
            )
        atoms.append(Atom(i + 1, Signal(grid, raw / nrm), f"mexhat(center={c:g})"))
    return Dictionary(tuple(atoms))


def demo_dictionary(grid: Grid) -> Dictionary:
    """The 13-atom Mexican hat demo dictionary on a grid covering [-4, 4]."""
    if grid.t_min > -4.0 or grid.t_max < 4.0:
        raise ValueError(f"demo dictionary needs a grid covering [-4, 4], got {grid}")
    return mexican_hat_dictionary(grid, DEMO_CENTERS)


def demo_signal(grid: Grid) -> Signal:
    """The bundled demo signal: DEMO_COEFFS combined over the demo atoms."""
    d = demo_dictionary(grid)
    return Signal(grid, kernels.combine_rows(np.array(DEMO_COEFFS), d.values))


def remove_atom(d: Dictionary, atom_id: int) -> Dictionary:
    """Dictionary without the given atom; survivor ids and order unchanged.

    Raises
    ------
    UnknownAtom
        If the id is not active.
    LastAtom
        If the dictionary holds a single atom.
    """
    pos = d.index_of(atom_id)
    if d.n_atoms == 1:
        raise LastAtom(f"cannot remove atom id {atom_id}: it is the last one")
    return Dictionary(d.atoms[:pos] + d.atoms[pos + 1 :])


def save_dictionary_csv(d: Dictionary, path) -> None:
    """Write a wide CSV: ``t`` column then one column per atom, header = labels."""
    for lab in d.labels:
        if "," in lab:
            raise ParseError(f"atom label contains a comma: {lab!r}")
    t = d.grid.t
    vals = d.values
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("t," + ",".join(d.labels) + "\n")
        for k in range(d.grid.n_points):
            row = ",".join(f"{vals[n, k]:.17g}" for n in range(d.n_atoms))
            fh.write(f"{t[k]:.17g},{row}\n")


def load_dictionary_csv(path) -> Dictionary:
    """Read a wide dictionary CSV; ids are assigned 1..N in column order.

    Raises
    ------
    ParseError
        On malformed rows, non-finite values or missing atom columns.
    GridMismatch
        If the ``t`` column is not a uniform grid.
    """
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(",")
        if len(header) < 2 or header[0] != "t":
            raise ParseError(f"{path}: expected header 't,<label>,...'")
        labels = header[1:]
        n_cols = len(header)
        ts: list[float] = []
        cols: list[list[float]] = [[] for _ in labels]
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != n_cols:
                raise ParseError(
                    f"{path}: line {lineno}: expected {n_cols} columns, "
                    f"got {len(parts)}"
                )
            try:
                nums = [float(p) for p in parts]
            except ValueError:
                raise ParseError(f"{path}: line {lineno}: non-numeric entry") from None
            ts.append(nums[0])
            for j in range(len(labels)):
                cols[j].append(nums[j + 1])
    grid = grid_from_samples(np.array(ts))
    atoms = []
    for j, lab in enumerate(labels):
        try:
            sig = Signal(grid, np.array(cols[j]))
        except ValueError as exc:
            raise ParseError(f"{path}: column {lab!r}: {exc}") from None
        atoms.append(Atom(j + 1, sig, lab))
    return Dictionary(tuple(atoms))

"""Uniformly sampled signals and their weighted inner product.

A :class:`Grid` fixes the sampling of an interval; a :class:`Signal` is a
vector of samples on a grid.  Inner products approximate the L2 integral
with trapezoid quadrature weights, and every reduction runs in ascending
sample order so results are reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import isfinite

import numpy as np

from . import kernels
from .errors import GridMismatch, ParseError

__all__ = [
    "Grid",
    "Signal",
    "inner",
    "norm_sq",
    "axpy",
    "grid_from_samples",
    "save_signal_csv",
    "load_signal_csv",
]

# Relative (to the step) slack allowed when recognizing a uniform grid in a file.
_UNIFORMITY_TOL = 1e-9


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Grid:
    """Uniform sampling of ``[t_min, t_max]`` with ``n_points`` samples.

    Attributes
    ----------
    t_min, t_max : float
        Interval endpoints, ``t_min < t_max``.
    n_points : int
        Number of samples, at least 2.
    """

    t_min: float
    t_max: float
    n_points: int

    def __post_init__(self):
        object.__setattr__(self, "t_min", float(self.t_min))
        object.__setattr__(self, "t_max", float(self.t_max))
        object.__setattr__(self, "n_points", int(self.n_points))
        if not (isfinite(self.t_min) and isfinite(self.t_max)):
            raise ValueError("grid endpoints must be finite")
        if not self.t_min < self.t_max:
            raise ValueError(
                f"grid needs t_min < t_max, got [{self.t_min}, {self.t_max}]"
            )
        if self.n_points < 2:
            raise ValueError(f"grid needs at least 2 points, got {self.n_points}")

    @property
    def step(self) -> float:
        """Spacing between consecutive samples."""
        return (self.t_max - self.t_min) / (self.n_points - 1)

    @cached_property
    def t(self) -> np.ndarray:
        """Sample abscissae (read-only)."""
        return _readonly(np.linspace(self.t_min, self.t_max, self.n_points))

    @cached_property
    def weights(self) -> np.ndarray:
        """Trapezoid quadrature weights: ``step`` inside, ``step/2`` at the ends."""
        w = np.full(self.n_points, self.step)
        w[0] = 0.5 * self.step
        w[-1] = 0.5 * self.step
        return _readonly(w)


@dataclass(frozen=True, eq=False)
class Signal:
    """Samples of a real-valued function on a :class:`Grid`.

    The sample array is coerced to a read-only float64 vector; entries must
    be finite.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.shape[0] != self.grid.n_points:
            raise ValueError(
                f"expected {self.grid.n_points} samples, got shape {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("signal samples must be finite")
        object.__setattr__(self, "values", _readonly(v))


def _check_same_grid(a: Signal, b: Signal) -> None:
    if a.grid != b.grid:
        raise GridMismatch(f"grids differ: {a.grid} vs {b.grid}")


def inner(a: Signal, b: Signal) -> float:
    """Weighted inner product of two signals on the same grid.

    Computes ``sum_k w[k]*a[k]*b[k]`` with trapezoid weights ``w``, summing
    in ascending sample order.  Exactly symmetric in its arguments.

    Raises
    ------
    GridMismatch
        If the signals live on different grids.
    """
    _check_same_grid(a, b)
    return float(kernels.dot_w(a.grid.weights, a.values, b.values))


def norm_sq(a: Signal) -> float:
    """Squared weighted norm, ``inner(a, a)``; always >= 0."""
    return float(kernels.dot_w(a.grid.weights, a.values, a.values))


def axpy(alpha: float, x: Signal, y: Signal) -> Signal:
    """Return ``alpha*x + y`` as a new signal."""
    _check_same_grid(x, y)
    return Signal(x.grid, alpha * x.values + y.values)


def grid_from_samples(ts: np.ndarray) -> Grid:
    """Reconstruct a uniform :class:`Grid` from its abscissae.

    Raises
    ------
    GridMismatch
        If the samples are not uniform within ``1e-9`` of the step, or
        fewer than 2 samples are given.
    """
    ts = np.asarray(ts, dtype=np.float64)
    if ts.ndim != 1 or ts.shape[0] < 2:
        raise GridMismatch("need at least 2 abscissae to recognize a grid")
    if not float(ts[0]) < float(ts[-1]):
        raise GridMismatch("abscissae must increase")
    grid = Grid(float(ts[0]), float(ts[-1]), int(ts.shape[0]))
    dev = float(np.max(np.abs(ts - grid.t)))
    if dev > _UNIFORMITY_TOL * grid.step:
        raise GridMismatch(
            f"abscissae deviate from a uniform grid by {dev:.3g} "
            f"(allowed {_UNIFORMITY_TOL * grid.step:.3g})"
        )
    return grid


def save_signal_csv(signal: Signal, path) -> None:
    """Write ``t,value`` rows with 17 significant digits (lossless for float64)."""
    t = signal.grid.t
    v = signal.values
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("t,value\n")
        for k in range(signal.grid.n_points):
            fh.write(f"{t[k]:.17g},{v[k]:.17g}\n")


def _parse_float(tok: str, path, lineno: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise ParseError(f"{path}: line {lineno}: not a number: {tok!r}") from None


def load_signal_csv(path) -> Signal:
    """Read a ``t,value`` CSV written by :func:`save_signal_csv`.

    The grid is reconstructed from the ``t`` column.

    Raises
    ------
    ParseError
        On malformed rows or non-finite values.
    GridMismatch
        If the ``t`` column is not a uniform grid.
    """
    ts: list[float] = []
    vs: list[float] = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if header.strip().split(",")[:1] != ["t"]:
            raise ParseError(f"{path}: expected header starting with 't'")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ParseError(
                    f"{path}: line {lineno}: expected 2 columns, got {len(parts)}"
                )
            ts.append(_parse_float(parts[0], path, lineno))
            vs.append(_parse_float(parts[1], path, lineno))
    grid = grid_from_samples(np.array(ts))
    try:
        return Signal(grid, np.array(vs))
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from None

"""Backward adaptation: remove atoms without rebuilding from scratch.

Dropping atom j from an active set would normally force a fresh dual
construction.  Instead, each surviving dual sheds its component along the
dual of the removed atom; a single rank-one sweep restores biorthogonality
on the smaller set.  Fitted coefficients admit the matching update, and the
exact growth of the squared approximation error under removal is
``|c_j|^2 / ||dual_j||^2``, computable before committing to anything.  That
quantity, the *impact*, drives the minimal-damage reduction loop.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from math import isfinite, sqrt

import numpy as np

from . import kernels
from .dictionary import Dictionary
from .errors import IllConditioned, LastAtom, UnknownAtom
from .forward import Approximation, DualState, _make_state, _readonly
from .jsonfmt import dump
from .space import Signal

__all__ = [
    "StopReason",
    "ResidualBudget",
    "TargetCount",
    "ExplicitOrder",
    "StoppingRule",
    "RemovalStep",
    "ReductionTrace",
    "downdate_duals",
    "downdate_coeffs",
    "discarded_direction",
    "impact",
    "select_removal",
    "reduce",
    "trace_to_json",
    "save_trace_json",
]

# Downdates divide by the removed dual's squared norm; below this we refuse.
_DOWNDATE_FLOOR = 1e-14

# Impacts within this relative window of the smallest count as tied.
_TIE_REL_TOL = 1e-10


class StopReason(enum.Enum):
    """Why a reduction loop stopped."""

    BUDGET_EXCEEDED = "BudgetExceeded"
    TARGET_COUNT = "TargetCount"
    EXHAUSTED = "Exhausted"


@dataclass(frozen=True)
class ResidualBudget:
    """Keep removing while the cumulative error increase stays within delta."""

    delta: float

    def __post_init__(self):
        object.__setattr__(self, "delta", float(self.delta))
        if not (isfinite(self.delta) and self.delta >= 0.0):
            raise ValueError(f"delta must be finite and >= 0, got {self.delta}")


@dataclass(frozen=True)
class TargetCount:
    """Remove until exactly ``count`` atoms remain."""

    count: int

    def __post_init__(self):
        object.__setattr__(self, "count", int(self.count))
        if self.count < 1:
            raise ValueError(f"count must be >= 1, got {self.count}")


@dataclass(frozen=True)
class ExplicitOrder:
    """Remove exactly these atom ids, in order."""

    ids: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "ids", tuple(int(i) for i in self.ids))
        if not self.ids:
            raise ValueError("need at least one id to remove")


StoppingRule = ResidualBudget | TargetCount | ExplicitOrder


@dataclass(frozen=True, eq=False)
class RemovalStep:
    """One committed removal: what left, what it cost, what remained."""

    removed_id: int
    removed_label: str
    impact: float
    approx_norm_sq_after: float
    coeffs_after: tuple[float, ...]


@dataclass(frozen=True, eq=False)
class ReductionTrace:
    """Complete record of a reduction run."""

    steps: tuple[RemovalStep, ...]
    delta: float | None
    initial_norm_sq: float
    stopped_reason: StopReason


def _removal_pos(state: DualState, atom_id: int) -> int:
    pos = state.dictionary.index_of(atom_id)
    dn2 = float(state.dual_norm_sq[pos])
    if dn2 <= _DOWNDATE_FLOOR:
        raise IllConditioned(
            f"dual of atom id {atom_id} has squared norm {dn2:.3g}, "
            f"below the safe floor {_DOWNDATE_FLOOR:g}"
        )
    return pos


def downdate_duals(state: DualState, atom_id: int) -> DualState:
    """State with atom ``atom_id`` removed and all surviving duals corrected.

    Raises
    ------
    UnknownAtom
        If the id is not active.
    LastAtom
        If only one atom remains.
    IllConditioned
        If the removed dual's squared norm is at or below 1e-14.
    """
    pos = _removal_pos(state, atom_id)
    if state.n_atoms == 1:
        raise LastAtom(f"cannot remove atom id {atom_id}: it is the last one")
    w = state.grid.weights
    g = kernels.row_dots(w, state.dual_values, state.dual_values[pos])
    duals = kernels.drop_dual(
        state.dual_values, g, pos, float(state.dual_norm_sq[pos])
    )
    new_dict = Dictionary(
        state.dictionary.atoms[:pos] + state.dictionary.atoms[pos + 1 :]
    )
    new_state = _make_state(new_dict, duals, 0.0, None)
    # Diagnostic: squared residual norm the last active atom would have.
    last_rn2 = 1.0 / float(new_state.dual_norm_sq[-1])
    return DualState(
        dictionary=new_state.dictionary,
        dual_values=new_state.dual_values,
        dual_norm_sq=new_state.dual_norm_sq,
        last_residual_norm_sq=last_rn2,
        ortho=None,
    )


def downdate_coeffs(
    state: DualState, approx: Approximation, atom_id: int
) -> Approximation:
    """Coefficients after removing ``atom_id``, still the orthogonal projection.

    Surviving coefficient n changes by ``-inner(dual_n, dual_j) * c_j /
    ||dual_j||^2``; no inner product with the signal is needed.
    """
    pos = _removal_pos(state, atom_id)
    if state.n_atoms == 1:
        raise LastAtom(f"cannot remove atom id {atom_id}: it is the last one")
    w = state.grid.weights
    g = kernels.row_dots(w, state.dual_values, state.dual_values[pos])
    s = float(approx.coeffs[pos]) / float(state.dual_norm_sq[pos])
    coeffs = np.delete(approx.coeffs - g * s, pos)
    reduced_rows = np.delete(state.dictionary.values, pos, axis=0)
    recon = kernels.combine_rows(coeffs, reduced_rows)
    an2 = kernels.dot_w(w, recon, recon)
    return Approximation(_readonly(coeffs), float(an2), approx.signal_ref)


def discarded_direction(state: DualState, atom_id: int) -> Signal:
    """Unit direction along which the approximant changes when ``atom_id`` leaves.

    This is the removed atom's component orthogonal to the span of the
    others, i.e. the normalized dual of the removed atom.
    """
    pos = _removal_pos(state, atom_id)
    dn = sqrt(float(state.dual_norm_sq[pos]))
    return Signal(state.grid, state.dual_values[pos] / dn)


def impact(state: DualState, approx: Approximation, atom_id: int) -> float:
    """Exact increase of the squared approximation error if ``atom_id`` leaves.

    Equals ``|c_j|^2 / ||dual_j||^2``; always >= 0.
    """
    pos = _removal_pos(state, atom_id)
    c = float(approx.coeffs[pos])
    return (c * c) / float(state.dual_norm_sq[pos])


def select_removal(state: DualState, approx: Approximation) -> int:
    """Id of the atom whose removal costs least.

    Impacts within 1e-10 (relative) of the smallest count as tied; the
    lowest atom id among the tied wins, which keeps traces deterministic.
    Atoms whose dual norm sits below the downdate floor are never chosen
    (they could not be removed safely anyway).
    """
    dn2 = np.asarray(state.dual_norm_sq, dtype=np.float64)
    c = np.asarray(approx.coeffs, dtype=np.float64)
    usable = dn2 > _DOWNDATE_FLOOR
    if not np.any(usable):
        raise IllConditioned("every dual norm is below the downdate floor")
    impacts = np.where(usable, (c * c) / dn2, np.inf)
    best = float(np.min(impacts))
    cut = best + _TIE_REL_TOL * best
    ids = state.dictionary.ids
    candidates = [ids[n] for n in range(len(ids)) if impacts[n] <= cut]
    return min(candidates)


def _apply_removal(state, approx, atom_id, steps):
    imp = impact(state, approx, atom_id)
    label = state.dictionary.atom(atom_id).label
    new_approx = downdate_coeffs(state, approx, atom_id)
    new_state = downdate_duals(state, atom_id)
    steps.append(
        RemovalStep(
            removed_id=atom_id,
            removed_label=label,
            impact=imp,
            approx_norm_sq_after=new_approx.approx_norm_sq,
            coeffs_after=tuple(float(x) for x in new_approx.coeffs),
        )
    )
    return new_state, new_approx, imp


def reduce(state: DualState, approx: Approximation, rule: StoppingRule):
    """Shrink the active set under a stopping rule, adapting duals and fit.

    Returns ``(state, approx, trace)``.  With :class:`ResidualBudget` the
    loop removes minimum-impact atoms while the cumulative impact stays
    within ``delta`` and stops *before* any removal that would overshoot;
    with :class:`TargetCount` it removes minimum-impact atoms until the
    count is reached; with :class:`ExplicitOrder` it removes exactly the
    given ids (raising LastAtom rather than emptying the set).
    """
    if not isinstance(rule, (ResidualBudget, TargetCount, ExplicitOrder)):
        raise TypeError(f"not a stopping rule: {rule!r}")
    steps: list[RemovalStep] = []
    initial = float(approx.approx_norm_sq)
    delta = rule.delta if isinstance(rule, ResidualBudget) else None

    if isinstance(rule, ResidualBudget):
        cum = 0.0
        while True:
            if state.n_atoms == 1:
                reason = StopReason.EXHAUSTED
                break
            j = select_removal(state, approx)
            if cum + impact(state, approx, j) > rule.delta:
                reason = StopReason.BUDGET_EXCEEDED
                break
            state, approx, imp = _apply_removal(state, approx, j, steps)
            cum += imp
    elif isinstance(rule, TargetCount):
        while state.n_atoms > rule.count:
            j = select_removal(state, approx)
            state, approx, _ = _apply_removal(state, approx, j, steps)
        reason = StopReason.TARGET_COUNT
    else:
        for j in rule.ids:
            if state.n_atoms == 1:
                raise LastAtom(
                    f"cannot remove atom id {j}: it would empty the active set"
                )
            state, approx, _ = _apply_removal(state, approx, j, steps)
        reason = StopReason.EXHAUSTED

    trace = ReductionTrace(
        steps=tuple(steps),
        delta=delta,
        initial_norm_sq=initial,
        stopped_reason=reason,
    )
    return state, approx, trace


def trace_to_json(trace: ReductionTrace) -> dict:
    """JSON-ready dict with per-step impacts, norms and coefficients."""
    return {
        "delta": trace.delta,
        "initial_norm_sq": trace.initial_norm_sq,
        "stopped_reason": trace.stopped_reason.value,
        "steps": [
            {
                "removed_id": s.removed_id,
                "label": s.removed_label,
                "impact": s.impact,
                "approx_norm_sq_after": s.approx_norm_sq_after,
                "coeffs_after": list(s.coeffs_after),
            }
            for s in trace.steps
        ],
    }


def save_trace_json(trace: ReductionTrace, path) -> None:
    dump(trace_to_json(trace), path)

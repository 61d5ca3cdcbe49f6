"""Command line front end.

Four subcommands: ``gen-mexhat`` writes a Mexican hat dictionary CSV,
``fit`` projects a signal onto a dictionary, ``reduce`` shrinks the fit
under a stopping rule, and ``compare`` contrasts plain truncation with
adapted removal for an explicit id list.

Exit codes: 0 success, 1 numerical failure (dependent atoms, singular or
ill-conditioned systems, degenerate atoms), 2 usage or input errors.
"""

from __future__ import annotations

import argparse
import re
import sys
from dataclasses import dataclass
from pathlib import Path

from . import kernels
from .backward import ExplicitOrder, ResidualBudget, TargetCount, reduce, save_trace_json
from .dictionary import (
    DEMO_CENTERS,
    demo_dictionary,
    load_dictionary_csv,
    mexican_hat_dictionary,
    save_dictionary_csv,
)
from .errors import (
    DegenerateAtom,
    GridMismatch,
    IllConditioned,
    LastAtom,
    LinearlyDependent,
    ParseError,
    SingularGram,
    UnknownAtom,
)
from .forward import build_duals, fit, reconstruct, residual_norm_sq
from .jsonfmt import dump
from .oracle import gram_system
from .space import Grid, load_signal_csv, save_signal_csv

__all__ = ["main", "RunConfig"]


@dataclass(frozen=True)
class RunConfig:
    """Validated options for one command invocation.

    Exactly one stopping rule may be set for ``reduce``; ``adapt`` is kept
    for API symmetry and is always true for the shipped commands (compare
    emits both the adapted and the non-adapted curve).
    """

    command: str
    grid: Grid | None = None
    centers: tuple[float, ...] | None = None
    dict_path: str | None = None
    signal_path: str | None = None
    out: str | None = None
    trace: str | None = None
    approx_csv: str | None = None
    strategy: str = "min-impact"
    delta: float | None = None
    target_count: int | None = None
    remove_ids: tuple[int, ...] | None = None
    adapt: bool = True

    def stopping_rule(self):
        given = [
            x is not None for x in (self.delta, self.target_count, self.remove_ids)
        ]
        if sum(given) != 1:
            raise ValueError(
                "exactly one of --delta, --target-count, --remove must be given"
            )
        if self.strategy == "explicit":
            if self.remove_ids is None:
                raise ValueError("--strategy explicit requires --remove")
            return ExplicitOrder(self.remove_ids)
        if self.remove_ids is not None:
            raise ValueError("--remove requires --strategy explicit")
        if self.delta is not None:
            return ResidualBudget(self.delta)
        return TargetCount(self.target_count)


def _grid_spec(spec: str) -> Grid:
    parts = spec.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(
            f"grid must be 'min:max:points', got {spec!r}"
        )
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"grid must be 'min:max:points' with numeric fields, got {spec!r}"
        ) from None
    try:
        return Grid(lo, hi, n)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _id_list(spec: str) -> tuple[int, ...]:
    try:
        ids = tuple(int(tok) for tok in spec.split(",") if tok.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated integers, got {spec!r}"
        ) from None
    if not ids:
        raise argparse.ArgumentTypeError("expected at least one atom id")
    return ids


def _id_list_or_empty(spec: str) -> tuple[int, ...]:
    if spec.strip() == "":
        return ()
    return _id_list(spec)


def _center_list(spec: str) -> tuple[float, ...]:
    try:
        centers = tuple(float(tok) for tok in spec.split(",") if tok.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated numbers, got {spec!r}"
        ) from None
    if not centers:
        raise argparse.ArgumentTypeError("expected at least one center")
    return centers


# Values like '-4:4:801' or '-1,0,1' start with a dash; widen argparse's idea
# of "looks like a number" so they are read as option values, not flags.
_DASH_VALUE = re.compile(r"^-\d")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="biortho",
        description="Adaptive biorthogonalization of atom dictionaries.",
    )
    p._negative_number_matcher = _DASH_VALUE
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-mexhat", help="write a Mexican hat dictionary CSV")
    g.add_argument("--grid", type=_grid_spec, required=True, metavar="MIN:MAX:POINTS")
    g.add_argument("--centers", type=_center_list, default=None,
                   help="comma-separated centers (default: the 13-atom demo set)")
    g.add_argument("--out", required=True, help="dictionary CSV to write")

    f = sub.add_parser("fit", help="project a signal onto a dictionary")
    f.add_argument("--dict", dest="dict_path", required=True)
    f.add_argument("--signal", dest="signal_path", required=True)
    f.add_argument("--out", required=True, help="coefficient JSON to write")
    f.add_argument("--approx-csv", default=None,
                   help="approximation CSV path (default: --out with .csv suffix)")

    r = sub.add_parser("reduce", help="shrink a fit under a stopping rule")
    r.add_argument("--dict", dest="dict_path", required=True)
    r.add_argument("--signal", dest="signal_path", required=True)
    r.add_argument("--strategy", choices=["min-impact", "explicit"],
                   default="min-impact")
    r.add_argument("--delta", type=float, default=None,
                   help="cumulative squared-error budget")
    r.add_argument("--target-count", type=int, default=None,
                   help="number of atoms to keep")
    r.add_argument("--remove", type=_id_list, default=None, metavar="ID[,ID...]",
                   help="explicit removal order (with --strategy explicit)")
    r.add_argument("--trace", required=True, help="reduction trace JSON to write")
    r.add_argument("--out", required=True, help="reduced approximation CSV to write")

    c = sub.add_parser("compare", help="truncation versus adapted removal")
    c.add_argument("--dict", dest="dict_path", required=True)
    c.add_argument("--signal", dest="signal_path", required=True)
    # An empty value means "remove nothing": the three output curves coincide
    # whenever the signal lies in the dictionary span.
    c.add_argument("--remove", type=_id_list_or_empty, required=True,
                   metavar="ID[,ID...]")
    c.add_argument("--out", required=True, help="comparison CSV to write")

    for child in (g, f, r, c):
        child._negative_number_matcher = _DASH_VALUE
    return p


def _config_from_args(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=ns.command,
        grid=getattr(ns, "grid", None),
        centers=getattr(ns, "centers", None),
        dict_path=getattr(ns, "dict_path", None),
        signal_path=getattr(ns, "signal_path", None),
        out=getattr(ns, "out", None),
        trace=getattr(ns, "trace", None),
        approx_csv=getattr(ns, "approx_csv", None),
        strategy=getattr(ns, "strategy", "min-impact"),
        delta=getattr(ns, "delta", None),
        target_count=getattr(ns, "target_count", None),
        remove_ids=getattr(ns, "remove", None),
    )


def _load_problem(cfg: RunConfig):
    d = load_dictionary_csv(cfg.dict_path)
    f = load_signal_csv(cfg.signal_path)
    if f.grid != d.grid:
        raise GridMismatch(
            f"signal grid {f.grid} does not match dictionary grid {d.grid}"
        )
    return d, f


def cmd_gen_mexhat(cfg: RunConfig) -> int:
    if cfg.centers is None:
        d = demo_dictionary(cfg.grid)
    else:
        d = mexican_hat_dictionary(cfg.grid, cfg.centers)
    save_dictionary_csv(d, cfg.out)
    gs = gram_system(d)
    print(f"atoms={d.n_atoms}")
    print(f"gram_condition_estimate={gs.condition_estimate:.6g}")
    return 0


def cmd_fit(cfg: RunConfig) -> int:
    d, f = _load_problem(cfg)
    state = build_duals(d)
    approx = fit(state, f)
    entries = [
        {
            "id": atom.id,
            "label": atom.label,
            "coeff": float(approx.coeffs[n]),
            "dual_norm_sq": float(state.dual_norm_sq[n]),
        }
        for n, atom in enumerate(d.atoms)
    ]
    dump(entries, cfg.out)
    approx_csv = cfg.approx_csv
    if approx_csv is None:
        derived = Path(cfg.out).with_suffix(".csv")
        if str(derived) == str(cfg.out):
            raise ValueError(
                f"--out {cfg.out!r} already ends in .csv; pass --approx-csv "
                f"to avoid overwriting it"
            )
        approx_csv = str(derived)
    elif str(approx_csv) == str(cfg.out):
        raise ValueError("--approx-csv must differ from --out")
    recon = reconstruct(state, approx)
    t = d.grid.t
    with open(approx_csv, "w", encoding="utf-8", newline="") as fh:
        fh.write("t,f,approx\n")
        for k in range(d.grid.n_points):
            fh.write(f"{t[k]:.17g},{f.values[k]:.17g},{recon.values[k]:.17g}\n")
    print(f"residual_norm_sq={residual_norm_sq(state, approx):.17g}")
    return 0


def cmd_reduce(cfg: RunConfig) -> int:
    rule = cfg.stopping_rule()
    d, f = _load_problem(cfg)
    state = build_duals(d)
    approx = fit(state, f)
    fit_residual = residual_norm_sq(state, approx)
    state2, approx2, trace = reduce(state, approx, rule)
    save_trace_json(trace, cfg.trace)
    save_signal_csv(reconstruct(state2, approx2), cfg.out)
    cum = 0.0
    for s in trace.steps:
        cum += s.impact
    print(f"atoms_remaining={state2.n_atoms}")
    print(f"stopped_reason={trace.stopped_reason.value}")
    print(f"cumulative_impact={cum:.17g}")
    print(f"approx_norm_sq={approx2.approx_norm_sq:.17g}")
    # Exact ledger: distance to the input signal is the fit residual plus
    # the cumulative impact of everything removed.
    print(f"residual_vs_input_norm_sq={fit_residual + cum:.17g}")
    return 0


def cmd_compare(cfg: RunConfig) -> int:
    d, f = _load_problem(cfg)
    state = build_duals(d)
    approx = fit(state, f)
    for atom_id in cfg.remove_ids:
        d.index_of(atom_id)
    keep = [n for n, atom in enumerate(d.atoms) if atom.id not in cfg.remove_ids]
    w = d.grid.weights
    truncated = kernels.combine_rows(approx.coeffs[keep], d.values[keep])
    if cfg.remove_ids:
        state2, approx2, _ = reduce(state, approx, ExplicitOrder(cfg.remove_ids))
    else:
        state2, approx2 = state, approx
    adapted = reconstruct(state2, approx2).values
    t = d.grid.t
    with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
        fh.write("t,f,truncated,adapted\n")
        for k in range(d.grid.n_points):
            fh.write(
                f"{t[k]:.17g},{f.values[k]:.17g},"
                f"{truncated[k]:.17g},{adapted[k]:.17g}\n"
            )
    dt = f.values - truncated
    da = f.values - adapted
    te = float(kernels.dot_w(w, dt, dt))
    ae = float(kernels.dot_w(w, da, da))
    print(f"truncated_error_sq={te:.17g} adapted_error_sq={ae:.17g}")
    return 0


_COMMANDS = {
    "gen-mexhat": cmd_gen_mexhat,
    "fit": cmd_fit,
    "reduce": cmd_reduce,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code is None else int(exc.code)
    try:
        cfg = _config_from_args(ns)
        return _COMMANDS[cfg.command](cfg)
    except (LinearlyDependent, SingularGram, IllConditioned, DegenerateAtom) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ParseError, GridMismatch, UnknownAtom, LastAtom, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

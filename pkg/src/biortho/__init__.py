"""Adaptive biorthogonalization of non-orthogonal atom dictionaries.

Build biorthogonal duals one atom at a time, downdate them when atoms are
removed, carry least-squares coefficients through both directions, and
reduce active sets under error budgets by always discarding the atom whose
removal hurts the approximation least.
"""

from .backward import (
    ExplicitOrder,
    ReductionTrace,
    RemovalStep,
    ResidualBudget,
    StopReason,
    StoppingRule,
    TargetCount,
    discarded_direction,
    downdate_coeffs,
    downdate_duals,
    impact,
    reduce,
    save_trace_json,
    select_removal,
    trace_to_json,
)
from .dictionary import (
    DEMO_CENTERS,
    DEMO_COEFFS,
    Atom,
    Dictionary,
    demo_dictionary,
    demo_signal,
    load_dictionary_csv,
    mexican_hat_dictionary,
    remove_atom,
    save_dictionary_csv,
)
from .errors import (
    BiorthoError,
    DegenerateAtom,
    GridMismatch,
    IllConditioned,
    LastAtom,
    LinearlyDependent,
    ParseError,
    SingularGram,
    UnknownAtom,
)
from .forward import (
    Approximation,
    DualState,
    add_atom,
    add_atom_with_coeffs,
    build_duals,
    dual_state_to_json,
    fit,
    init_duals,
    reconstruct,
    residual_norm_sq,
    save_dual_state_json,
)
from .oracle import (
    GramSystem,
    gram_system,
    oracle_best_removal,
    oracle_duals,
    oracle_project,
)
from .space import (
    Grid,
    Signal,
    axpy,
    grid_from_samples,
    inner,
    load_signal_csv,
    norm_sq,
    save_signal_csv,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Grid",
    "Signal",
    "inner",
    "norm_sq",
    "axpy",
    "grid_from_samples",
    "save_signal_csv",
    "load_signal_csv",
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
    "GramSystem",
    "gram_system",
    "oracle_duals",
    "oracle_project",
    "oracle_best_removal",
    "BiorthoError",
    "GridMismatch",
    "ParseError",
    "DegenerateAtom",
    "UnknownAtom",
    "LastAtom",
    "LinearlyDependent",
    "IllConditioned",
    "SingularGram",
]

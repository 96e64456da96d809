"""Offline resilience monitoring for discrete-time signals.

Evaluates plain STL and resiliency formulas (whose atoms demand recovery
within alpha steps followed by beta steps of stability) over sampled
traces, reporting set-valued recoverability/durability margins alongside
the Boolean verdict they certify.
"""

from .errors import (
    EvaluationError,
    ExtensionWarning,
    ParseError,
    ResilmonError,
    ResilmonWarning,
    StrictComparisonWarning,
    TraceError,
)
from .flockgen import (
    DisturbanceSpec,
    FlockParams,
    FlockState,
    connected_components,
    cost_J,
    simulate,
)
from .formula import (
    AffineExpr,
    Always,
    And,
    Atom,
    Eventually,
    Interval,
    Not,
    Or,
    RAtom,
    SrsAlways,
    SrsAnd,
    SrsEventually,
    SrsFormula,
    SrsNot,
    SrsOr,
    SrsUntil,
    StlFormula,
    Until,
    horizon,
    parse_srs,
    parse_stl,
    srs_to_stl,
    srs_to_text,
    stl_to_text,
)
from .resilience import (
    DomRelation,
    Episode,
    Evaluation,
    ResPair,
    ResSet,
    Verdict,
    atom_series,
    classify,
    compare,
    evaluate,
    max_re,
    min_re,
    resilience_horizon,
    resv,
    t_dur,
    t_rec,
)
from .stl_semantics import rho, sat, theta_plus
from .trace import Signal, extend, load_trace, to_csv, value_at

__version__ = "0.1.0"

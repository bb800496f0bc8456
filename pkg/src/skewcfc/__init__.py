"""Exact solver for X^T A X = B with A in canonical form for congruence and B skew-symmetric."""

from __future__ import annotations

from .blocks import (
    H2M1,
    Block,
    BlockCensus,
    BlockKind,
    CfcSpec,
    G,
    H,
    InvalidBlockError,
    J,
    RhoValue,
    SpecParseError,
    census,
    format_spec,
    h2_power,
    materialize,
    parse_spec,
    rank_a_plus_at_formula,
    rho,
    strip_j1,
    validate,
)
from .exact import DimensionError, GaussianRational, Matrix, SingularMatrixError, congruence, mat_rank
from .planner import (
    Certificate,
    MaxSkewRank,
    NotConsistentError,
    Verdict,
    VerdictKind,
    combine_leftovers,
    decide,
    max_skew_rank,
    reduce_type0,
    reduce_typeI,
    reduce_typeII,
    solve,
    solve_general,
    verify,
)
from .rules import Rule, RuleError, WitnessError
from .skew import NotSkewError, SkewReduction, is_skew, skew_canonicalize

__version__ = "0.1.0"

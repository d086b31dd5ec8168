"""Bounded synthesis and unrealizability checking for HyperLTL specifications."""

from .automata import SymbolicAutomaton, dualize, ltl_to_nba, nba_accepts_lasso, ucw_accepts_lasso, ucw_for
from .counterex import (
    CounterexampleProblem, CounterStrategy, build_counterexample_problem, closed_loop, find_counterexample,
    verify_counterexample,
)
from .formula import (
    AlphabetSpec, Formula, ParseError, PCPInstance, PrefixClass, collapse, encode_pcp, format_formula,
    parse_hyperltl, parse_ltl, prefix_class, reduce1,
)
from .fragments import (
    DecidabilityVerdict, DistributedArchitecture, ExecutionPlan, Fragment, classify, exists_forall1_reduction,
    exists_reduction, linear_check, route,
)
from .semantics import LassoTrace, TraceUniverse, check_equiv_bounded, eval_formula
from .specfile import SpecFile
from .synth import SynthesisResult, encode, synthesize, synthesize_at
from .tsys import Semantics, TransitionSystem, model_check, self_compose

__all__ = [
    "AlphabetSpec", "CounterStrategy", "CounterexampleProblem", "DecidabilityVerdict", "DistributedArchitecture",
    "ExecutionPlan", "Formula", "Fragment", "LassoTrace", "PCPInstance", "ParseError", "PrefixClass", "Semantics",
    "SpecFile", "SymbolicAutomaton", "SynthesisResult", "TraceUniverse", "TransitionSystem",
    "build_counterexample_problem", "check_equiv_bounded", "classify", "closed_loop", "collapse", "dualize",
    "encode", "encode_pcp", "eval_formula", "exists_forall1_reduction", "exists_reduction",
    "find_counterexample", "format_formula", "linear_check", "ltl_to_nba", "model_check", "nba_accepts_lasso",
    "parse_hyperltl", "parse_ltl", "prefix_class", "reduce1", "route", "self_compose", "synthesize",
    "synthesize_at", "ucw_accepts_lasso", "ucw_for", "verify_counterexample",
]

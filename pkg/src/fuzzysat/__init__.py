"""Approximate satisfiability for bitvector queries via input mutation."""

from fuzzysat import expr
from fuzzysat.analysis import InputGroup, MetadataStore, analyze, conflicting, fix_input_bytes
from fuzzysat.corpus import CorpusReport, load_query, run_corpus
from fuzzysat.interval import WrappedInterval, from_comparison, intersect, shift_by_addend
from fuzzysat.mutate import MutationConfig, mutate
from fuzzysat.oracle import exhaustive_solve
from fuzzysat.smtlib import ParseError, UnsupportedError, dump_query, parse_file, parse_text
from fuzzysat.solver import (
    OPT_SAT, PROVEN_UNSAT, SAT, UNKNOWN, Query, Session, SolverResult, solve, solve_all,
    solve_max, solve_min,
)

__version__ = "0.1.0"

__all__ = [
    "expr", "InputGroup", "MetadataStore", "analyze", "conflicting", "fix_input_bytes",
    "CorpusReport", "load_query", "run_corpus", "WrappedInterval", "from_comparison",
    "intersect", "shift_by_addend", "MutationConfig", "mutate", "exhaustive_solve",
    "ParseError", "UnsupportedError", "dump_query", "parse_file", "parse_text",
    "SAT", "OPT_SAT", "PROVEN_UNSAT", "UNKNOWN", "Query", "Session", "SolverResult",
    "solve", "solve_min", "solve_max", "solve_all",
]

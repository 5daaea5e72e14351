"""First-order query enumeration over bounded-degree structures."""

from .decomposition import DecompositionPlan, build_plan, div_holds, dump_plan, plan_accepts
from .enumeration import (
    DelayStats,
    EnumerationCursor,
    MergeOrderError,
    delay_stats,
    enumerate_answers,
    merge_streams,
    next_answer,
    open_cursor,
)
from .evaluator import brute_enumerate, evaluate
from .formula import Formula, FormulaError, Signature, locality_radius, parse_formula
from .structure import Structure, load_structure, parse_facts

__all__ = [
    "DecompositionPlan",
    "DelayStats",
    "EnumerationCursor",
    "Formula",
    "FormulaError",
    "MergeOrderError",
    "Signature",
    "Structure",
    "brute_enumerate",
    "build_plan",
    "delay_stats",
    "div_holds",
    "dump_plan",
    "enumerate_answers",
    "evaluate",
    "load_structure",
    "locality_radius",
    "merge_streams",
    "next_answer",
    "open_cursor",
    "parse_facts",
    "parse_formula",
    "plan_accepts",
]

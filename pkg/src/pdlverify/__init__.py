"""Deductive verification of probabilistic lower bounds for pGCL programs.

The pipeline parses a task, runs forward symbolic execution to build a proof
tree whose side conditions are linear probability constraints, and solves
them exactly. An explicit MDP oracle computes ground-truth expectations.
"""

from .constraints import (ROOT, AffineUB, LeafEq, MinUB, ProbVar, SolveResult, TargetLB,
                          check_assignment, emit_smtlib, max_feasible)
from .engine import (Judgment, ProofNode, collect_constraints, execute, execute_task,
                     format_tree, tree_to_json)
from .errors import PdlError
from .formula import Box, Updated, sat_pdl, sat_state_formula
from .oracle import OracleResult, enumerate_paths, expectation, step
from .parser import VerificationTask, parse_expr, parse_formula, parse_program, parse_task
from .validity import check_validity
from .verify import Verdict, oracle_task, verify_task

__version__ = "0.1.0"

__all__ = [
    "ROOT", "AffineUB", "Box", "Judgment", "LeafEq", "MinUB", "OracleResult", "PdlError",
    "ProbVar", "ProofNode", "SolveResult", "TargetLB", "Updated", "Verdict",
    "VerificationTask", "check_assignment", "check_validity", "collect_constraints",
    "emit_smtlib", "enumerate_paths", "execute", "execute_task", "expectation",
    "format_tree", "max_feasible", "oracle_task", "parse_expr", "parse_formula",
    "parse_program", "parse_task", "sat_pdl", "sat_state_formula", "step", "tree_to_json",
    "verify_task",
]

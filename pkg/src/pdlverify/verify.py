"""End-to-end pipeline: task -> proof tree -> constraints -> verdict, and the
oracle cross-check over input valuations."""

from __future__ import annotations

import dataclasses
import itertools
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .constraints import ROOT, ProbConstraint, SolveResult, TargetLB, max_feasible
from .engine import (ProofNode, budget_exhausted, collect_constraints, execute_task,
                     undecided_leaves)
from .errors import BindingError
from .formula import Atom, conj, conjuncts, sat_state_formula
from .oracle import OracleResult, expectation
from .parser import VerificationTask
from .pgcl import Binary, Lit, Valuation, Value, Var

PROVED = "PROVED"
REFUTED = "REFUTED_BY_SOLVER"
INCONCLUSIVE = "INCONCLUSIVE"

EXIT_CODES = {PROVED: 0, REFUTED: 1, INCONCLUSIVE: 2}
EXIT_INPUT_ERROR = 3


@dataclass(frozen=True)
class Verdict:
    status: str
    claimed: Fraction
    max_provable: Fraction
    elapsed_ms: float
    proof_tree_path: str | None = None
    notes: tuple[str, ...] = ()

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]


@dataclass(frozen=True)
class VerifyResult:
    verdict: Verdict
    tree: ProofNode
    constraints: list[ProbConstraint]  # including the target constraint
    solution: SolveResult


# --- bindings ---------------------------------------------------------------

def parse_binding(text: str) -> tuple[str, Value]:
    name, sep, raw = text.partition("=")
    name, raw = name.strip(), raw.strip()
    if not sep or not name or not raw:
        raise BindingError(f"binding must look like name=value, got {text!r}")
    if raw in ("true", "false"):
        return name, raw == "true"
    try:
        return name, int(raw)
    except ValueError:
        raise BindingError(f"value of {name} must be an integer or true/false, got {raw!r}")


def apply_bindings(task: VerificationTask, binds: Mapping[str, Value]) -> VerificationTask:
    """Add ``x == v`` to the assumption for every binding."""
    decls = {d.name: d for d in task.inputs}
    extra = []
    for name, v in binds.items():
        d = decls.get(name)
        if d is None:
            raise BindingError(f"'{name}' is not an @input")
        if (type(v) is bool) != (d.type == "bool"):
            raise BindingError(f"'{name}' has type {d.type}")
        dom = d.domain()
        if dom is not None and v not in dom:
            raise BindingError(f"{name}={v} is outside the declared range of '{name}'")
        extra.append(Atom(Binary("==", Var(name), Lit(v))))
    if not extra:
        return task
    return dataclasses.replace(task, assume=conj(conjuncts(task.assume) + extra))


def input_valuations(task: VerificationTask, binds: Mapping[str, Value] | None = None,
                     override_assume: bool = False) -> list[Valuation]:
    """All input valuations satisfying ``@assume``; bindings fix values.

    With ``override_assume``, a valuation fully fixed by bindings is returned
    even when it violates ``@assume``.
    """
    binds = dict(binds or {})
    apply_bindings(task, binds)  # validates
    names, choices = [], []
    for d in task.inputs:
        names.append(d.name)
        if d.name in binds:
            choices.append([binds[d.name]])
        elif d.domain() is not None:
            choices.append(d.domain())
        else:
            raise BindingError(
                f"input '{d.name}' has no finite range; add --bind {d.name}=v "
                f"or declare '@input {d.name} : int in [lo..hi]'")
    full = bool(binds) and all(n in binds for n in names)
    out = []
    for values in itertools.product(*choices):
        env = Valuation(dict(zip(names, values)))
        if (override_assume and full) or sat_state_formula(env, task.assume):
            out.append(env)
    return out


# --- verify -----------------------------------------------------------------

def verify_task(task: VerificationTask, budget: int = 8,
                binds: Mapping[str, Value] | None = None,
                split_inputs: bool = True) -> VerifyResult:
    start = time.perf_counter()
    task = apply_bindings(task, binds or {})
    tree = execute_task(task, budget, split_inputs)
    constraints = collect_constraints(tree) + [TargetLB(ROOT, task.prob)]
    solution = max_feasible(constraints)
    best = solution.witness
    notes = []
    exhausted = budget_exhausted(tree)
    undecided = undecided_leaves(tree)
    if exhausted and best < task.prob:
        notes.append(f"unroll budget {budget} exhausted; raise --unroll")
    if undecided and best < task.prob:
        notes.append(f"{len(undecided)} leaf check(s) undecided ({undecided[0].undecided}); "
                     "add --bind flags or declare input ranges")
    if best >= task.prob:
        status = PROVED
    elif exhausted or undecided:
        status = INCONCLUSIVE
    else:
        status = REFUTED
    elapsed = (time.perf_counter() - start) * 1000
    verdict = Verdict(status, task.prob, best, elapsed, notes=tuple(notes))
    return VerifyResult(verdict, tree, constraints, solution)


# --- oracle -----------------------------------------------------------------

@dataclass(frozen=True)
class OracleRun:
    valuation: Valuation
    result: OracleResult


def oracle_task(task: VerificationTask, budget: int = 8,
                binds: Mapping[str, Value] | None = None) -> list[OracleRun]:
    """Oracle expectation per input valuation. Binding every input selects
    that valuation directly, whether or not it satisfies ``@assume``."""
    return [OracleRun(env, expectation(task.body, env, task.ensures, budget))
            for env in input_valuations(task, binds, override_assume=True)]


def oracle_minimum(runs: Sequence[OracleRun]) -> Fraction:
    """Worst case over valuations; an empty set of valuations gives 1."""
    return min((r.result.lower_bound for r in runs), default=Fraction(1))

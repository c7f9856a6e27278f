"""Probability constraints emitted by the proof engine, and their solver.

Every constraint bounds one variable from above by its children in the proof
tree (or by a constant at a leaf); a target constraint bounds the root from
below. Since min and convex combinations are monotone, the pointwise-maximal
assignment is obtained in a single bottom-up pass and the claimed bound is
feasible iff the root's maximum reaches it.

A leaf pin ``p = c`` is read as ``p <= c`` with all variables in [0, 1]: a
pin to 0 forces 0, a pin to 1 is no restriction. Under the maximal
assignment a variable constrained only by its pin takes exactly ``c``, and
the upper-bound reading keeps the system consistent when an ``if`` lets two
branches constrain the same variable.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from .errors import CyclicConstraints, MalformedConstraint, MissingVariable
from .printer import format_prob

ZERO, ONE = Fraction(0), Fraction(1)


@dataclass(frozen=True, order=True)
class ProbVar:
    """Probability variable named by its branch path from the proof root."""

    path: tuple[int, ...] = ()

    def child(self, index: int) -> "ProbVar":
        return ProbVar(self.path + (index,))

    def __str__(self) -> str:
        if all(i < 10 for i in self.path):
            return "p" + "".join(map(str, self.path))
        return "p_" + "_".join(map(str, self.path))


ROOT = ProbVar()


@dataclass(frozen=True)
class LeafEq:
    var: ProbVar
    value: int

    def __str__(self):
        return f"{self.var} = {self.value}"


@dataclass(frozen=True)
class MinUB:
    var: ProbVar
    operands: tuple[ProbVar, ...]

    def __str__(self):
        return f"{self.var} <= min({', '.join(map(str, self.operands))})"


@dataclass(frozen=True)
class AffineUB:
    var: ProbVar
    weight: Fraction
    left: ProbVar
    right: ProbVar

    def __str__(self):
        return (f"{self.var} <= {format_prob(self.weight)}*{self.left}"
                f" + {format_prob(1 - self.weight)}*{self.right}")


@dataclass(frozen=True)
class TargetLB:
    var: ProbVar
    bound: Fraction

    def __str__(self):
        return f"{self.var} >= {format_prob(self.bound)}"


ProbConstraint = Union[LeafEq, MinUB, AffineUB, TargetLB]


def referenced_vars(constraints: Iterable[ProbConstraint]) -> set[ProbVar]:
    out: set[ProbVar] = set()
    for c in constraints:
        out.add(c.var)
        if isinstance(c, MinUB):
            out.update(c.operands)
        elif isinstance(c, AffineUB):
            out.update((c.left, c.right))
    return out


def _validate(c: ProbConstraint) -> None:
    if isinstance(c, LeafEq):
        if c.value not in (0, 1):
            raise MalformedConstraint(f"leaf pin must be 0 or 1: {c}")
    elif isinstance(c, MinUB):
        if not c.operands:
            raise MalformedConstraint(f"min over no operands for {c.var}")
    elif isinstance(c, AffineUB):
        if not 0 <= c.weight <= 1:
            raise MalformedConstraint(f"weight outside [0, 1]: {c}")
    elif isinstance(c, TargetLB):
        if not 0 <= c.bound <= 1:
            raise MalformedConstraint(f"target outside [0, 1]: {c}")
    else:
        raise MalformedConstraint(f"not a probability constraint: {c!r}")


def _children(c: ProbConstraint) -> tuple[ProbVar, ...]:
    if isinstance(c, MinUB):
        return c.operands
    if isinstance(c, AffineUB):
        return (c.left, c.right)
    return ()


def _bound(c: ProbConstraint, value: Mapping[ProbVar, Fraction]) -> Fraction:
    if isinstance(c, LeafEq):
        return Fraction(c.value)
    if isinstance(c, MinUB):
        return min(value[v] for v in c.operands)
    return c.weight * value[c.left] + (1 - c.weight) * value[c.right]


@dataclass(frozen=True)
class SolveResult:
    feasible: bool
    max_assignment: dict[ProbVar, Fraction]
    witness: Fraction | None  # maximal value of the root variable


def max_feasible(constraints: Sequence[ProbConstraint]) -> SolveResult:
    for c in constraints:
        _validate(c)
    uppers: dict[ProbVar, list[ProbConstraint]] = {}
    targets = []
    for c in constraints:
        if isinstance(c, TargetLB):
            targets.append(c)
        else:
            uppers.setdefault(c.var, []).append(c)

    value: dict[ProbVar, Fraction] = {}
    on_path: set[ProbVar] = set()
    for start in sorted(referenced_vars(constraints)):
        if start in value:
            continue
        stack = [(start, False)]
        while stack:
            v, expanded = stack.pop()
            if v in value:
                continue
            deps = [d for c in uppers.get(v, ()) for d in _children(c)]
            if not expanded:
                on_path.add(v)
                stack.append((v, True))
                for d in deps:
                    if d in on_path:
                        raise CyclicConstraints(f"{v} depends on itself via {d}")
                    if d not in value:
                        stack.append((d, False))
            else:
                # unconstrained variables take their maximum, 1
                value[v] = min([ONE] + [_bound(c, value) for c in uppers.get(v, ())])
                on_path.discard(v)

    root = targets[0].var if targets else (ROOT if ROOT in value else None)
    witness = value.get(root) if root is not None else None
    feasible = all(value[t.var] >= t.bound for t in targets)
    return SolveResult(feasible, value, witness)


def check_assignment(constraints: Sequence[ProbConstraint],
                     assignment: Mapping[ProbVar, Fraction]) -> bool:
    """Independent check of an assignment by direct substitution."""
    for v in sorted(referenced_vars(constraints)):
        if v not in assignment:
            raise MissingVariable(v)
        if not 0 <= assignment[v] <= 1:
            return False
    for c in constraints:
        x = assignment[c.var]
        if isinstance(c, TargetLB):
            ok = x >= c.bound
        elif isinstance(c, LeafEq):
            ok = x <= c.value
        elif isinstance(c, MinUB):
            ok = all(x <= assignment[o] for o in c.operands)
        elif isinstance(c, AffineUB):
            ok = x <= c.weight * assignment[c.left] + (1 - c.weight) * assignment[c.right]
        else:
            raise MalformedConstraint(f"not a probability constraint: {c!r}")
        if not ok:
            return False
    return True


# --- SMT-LIB export ---------------------------------------------------------

def smt_rational(q: Fraction) -> str:
    q = Fraction(q)
    if q < 0:
        return f"(- (/ {-q.numerator} {q.denominator}))"
    return f"(/ {q.numerator} {q.denominator})"


def _smt_assertions(c: ProbConstraint) -> list[str]:
    v = str(c.var)
    if isinstance(c, LeafEq):
        return [f"(<= {v} {smt_rational(c.value)})"]
    if isinstance(c, MinUB):
        return [f"(<= {v} {o})" for o in c.operands]
    if isinstance(c, AffineUB):
        return [f"(<= {v} (+ (* {smt_rational(c.weight)} {c.left}) "
                f"(* {smt_rational(1 - c.weight)} {c.right})))"]
    return [f"(>= {v} {smt_rational(c.bound)})"]


def emit_smtlib(constraints: Sequence[ProbConstraint], target: Fraction,
                root: ProbVar = ROOT) -> str:
    """QF_LRA script that is satisfiable iff ``root >= target`` is feasible."""
    for c in constraints:
        _validate(c)
    variables = sorted(referenced_vars(constraints) | {root})
    lines = ["; probability constraints of a pDL proof tree",
             "(set-logic QF_LRA)"]
    lines += [f"(declare-fun {v} () Real)" for v in variables]
    lines += [f"(assert (and (<= {smt_rational(ZERO)} {v}) (<= {v} {smt_rational(ONE)})))"
              for v in variables]
    for c in constraints:
        for a in _smt_assertions(c):
            lines.append(f"(assert {a})")
    lines.append(f"(assert (>= {root} {smt_rational(target)}))")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"

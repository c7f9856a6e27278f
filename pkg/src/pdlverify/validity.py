"""Decision procedure for the first-order side conditions ``/\\ gamma -> psi``.

Strategies, tried in order:

1. constant folding after quantifier expansion;
2. pinning: conjuncts of the form ``x == c`` (or a bare boolean ``x`` /
   ``!x``) fix ``x``; the fixed values are substituted until nothing changes;
3. enumeration over the finite domains of whatever variables remain.

When none applies ``Undecided`` is raised. ``validity_query_smtlib`` renders
the same question for an external solver.
"""

from __future__ import annotations

import itertools
import math
from typing import Mapping, Sequence

from .errors import Undecided
from .formula import (F_FALSE, F_TRUE, And, Atom, ForallRange, Formula, Not, conjuncts,
                      expand_quantifiers, formula_vars, sat_state_formula, simplify_formula,
                      substitute_formula)
from .pgcl import Binary, Expr, Lit, Unary, Value, Var

ENUMERATION_LIMIT = 100_000


def pinned_value(f: Formula) -> tuple[str, Value] | None:
    if isinstance(f, Atom):
        e = f.expr
        if isinstance(e, Var):
            return e.name, True
        if isinstance(e, Binary) and e.op == "==":
            if isinstance(e.left, Var) and isinstance(e.right, Lit):
                return e.left.name, e.right.value
            if isinstance(e.right, Var) and isinstance(e.left, Lit):
                return e.right.name, e.left.value
    if isinstance(f, Not) and isinstance(f.body, Atom) and isinstance(f.body.expr, Var):
        return f.body.expr.name, False
    return None


def _same_value(a: Value, b: Value) -> bool:
    return type(a) is type(b) and a == b


def _normalize(fs: Sequence[Formula]) -> list[Formula]:
    out = []
    for f in fs:
        out.extend(conjuncts(simplify_formula(expand_quantifiers(f))))
    return out


def check_validity(gamma: Sequence[Formula], psi: Formula,
                   domains: Mapping[str, Sequence[Value]] | None = None) -> bool:
    """Return whether ``/\\ gamma -> psi`` holds in every valuation."""
    domains = domains or {}
    hyps = _normalize(gamma)
    goal = simplify_formula(expand_quantifiers(psi))
    if goal == F_TRUE or goal in hyps or F_FALSE in hyps:
        return True

    pins: dict[str, Value] = {}
    while True:
        new = {}
        for h in hyps:
            pin = pinned_value(h)
            if pin is None:
                continue
            name, v = pin
            old = pins.get(name, new.get(name))
            if old is not None and not _same_value(old, v):
                return True  # contradictory hypotheses
            if name not in pins:
                new[name] = v
        if not new:
            break
        pins.update(new)
        mapping = {k: Lit(v) for k, v in new.items()}
        hyps = _normalize([substitute_formula(h, mapping) for h in hyps])
        goal = simplify_formula(substitute_formula(goal, mapping))
        if F_FALSE in hyps:
            return True

    free = set(formula_vars(goal))
    for h in hyps:
        free |= formula_vars(h)
    if not free:
        if all(sat_state_formula({}, h) for h in hyps):
            return sat_state_formula({}, goal)
        return True

    names = sorted(free)
    missing = [n for n in names if n not in domains]
    if missing:
        raise Undecided(f"no finite domain for {', '.join(missing)}")
    size = math.prod(len(domains[n]) for n in names)
    if size > ENUMERATION_LIMIT:
        raise Undecided(f"{size} valuations exceed the enumeration limit")
    for values in itertools.product(*(domains[n] for n in names)):
        env = dict(zip(names, values))
        if all(sat_state_formula(env, h) for h in hyps) and not sat_state_formula(env, goal):
            return False
    return True


def is_satisfiable(gamma: Sequence[Formula],
                   domains: Mapping[str, Sequence[Value]] | None = None) -> bool:
    return not check_validity(gamma, F_FALSE, domains)


# --- SMT-LIB rendering ------------------------------------------------------

_SMT_RESERVED = {"and", "or", "not", "div", "mod", "distinct", "ite", "let", "true",
                 "false", "assert", "forall", "exists", "abs", "Int", "Bool", "Real"}

_SMT_BINOP = {"+": "+", "-": "-", "*": "*", "/": "div", "%": "mod", "<": "<", "<=": "<=",
              ">": ">", ">=": ">=", "==": "=", "!=": "distinct", "&&": "and", "||": "or"}


def smt_symbol(name: str) -> str:
    return f"|{name}|" if name in _SMT_RESERVED else name


def smt_expr(e: Expr) -> str:
    if isinstance(e, Lit):
        if type(e.value) is bool:
            return "true" if e.value else "false"
        return str(e.value) if e.value >= 0 else f"(- {-e.value})"
    if isinstance(e, Var):
        return smt_symbol(e.name)
    if isinstance(e, Unary):
        return f"({'-' if e.op == '-' else 'not'} {smt_expr(e.operand)})"
    return f"({_SMT_BINOP[e.op]} {smt_expr(e.left)} {smt_expr(e.right)})"


def smt_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        return smt_expr(f.expr)
    if isinstance(f, Not):
        return f"(not {smt_formula(f.body)})"
    if isinstance(f, And):
        return f"(and {smt_formula(f.left)} {smt_formula(f.right)})"
    if isinstance(f, ForallRange):
        return smt_formula(expand_quantifiers(f))
    raise TypeError(f"not a state formula: {f!r}")


def _nonlinear(e: Expr) -> bool:
    if isinstance(e, Unary):
        return _nonlinear(e.operand)
    if isinstance(e, Binary):
        if e.op == "*" and not (isinstance(e.left, Lit) or isinstance(e.right, Lit)):
            return True
        if e.op in ("/", "%") and not isinstance(e.right, Lit):
            return True
        return _nonlinear(e.left) or _nonlinear(e.right)
    return False


def _formula_nonlinear(f: Formula) -> bool:
    if isinstance(f, Atom):
        return _nonlinear(f.expr)
    if isinstance(f, Not):
        return _formula_nonlinear(f.body)
    if isinstance(f, And):
        return _formula_nonlinear(f.left) or _formula_nonlinear(f.right)
    return _formula_nonlinear(expand_quantifiers(f))


def validity_query_smtlib(gamma: Sequence[Formula], psi: Formula,
                          types: Mapping[str, str] | None = None,
                          domains: Mapping[str, Sequence[Value]] | None = None) -> str:
    """Script that is ``unsat`` iff ``/\\ gamma -> psi`` is valid.

    Variables default to ``Int`` unless ``types`` says ``bool``; integer
    variables with a finite domain get range assertions.
    """
    types = types or {}
    domains = domains or {}
    formulas = [expand_quantifiers(g) for g in gamma] + [expand_quantifiers(psi)]
    names = sorted(set().union(*(formula_vars(f) for f in formulas)))
    logic = "QF_NIA" if any(_formula_nonlinear(f) for f in formulas) else "QF_LIA"
    lines = [f"(set-logic {logic})"]
    for n in names:
        sort = "Bool" if types.get(n) == "bool" else "Int"
        lines.append(f"(declare-fun {smt_symbol(n)} () {sort})")
        dom = domains.get(n)
        if sort == "Int" and dom:
            lines.append(f"(assert (and (<= {smt_expr(Lit(min(dom)))} {smt_symbol(n)}) "
                         f"(<= {smt_symbol(n)} {smt_expr(Lit(max(dom)))})))")
    for g in formulas[:-1]:
        lines.append(f"(assert {smt_formula(g)})")
    lines.append(f"(assert (not {smt_formula(formulas[-1])}))")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"

"""pDL formulas, symbolic updates and satisfaction.

State formulas are built from ``Atom``, ``Not``, ``And`` and ``ForallRange``;
``Or``/``Implies``/``Exists`` are helper constructors that desugar into those.
A pDL formula may additionally contain ``Box`` (the lower-bound p-box) and
``Updated`` (an update list applied to a formula).

An update list ``[x1 -> t1, ..., xn -> tn]`` is applied left to right: each
term is evaluated in the state produced by the bindings before it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence, Union

from .errors import EvalError, InexactBudget, TypeMismatch
from .pgcl import (FALSE, TRUE, Binary, Expr, Lit, Stmt, Unary, Valuation, Value, Var,
                   apply_binary, apply_unary, eval_expr, expr_vars, update_valuation)


@dataclass(frozen=True)
class Atom:
    expr: Expr


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class ForallRange:
    """``forall var in [lo..hi] : body`` over the inclusive integer range."""

    var: str
    lo: int
    hi: int
    body: "Formula"


@dataclass(frozen=True)
class Update:
    name: str
    term: Expr

    def __str__(self):
        from .printer import format_expr
        return f"{self.name} -> {format_expr(self.term)}"


@dataclass(frozen=True)
class Box:
    """Lower-bound p-box: ``prob`` bounds the worst-case probability of ``body``."""

    program: Stmt
    prob: Fraction
    body: "Formula"

    def __post_init__(self):
        p = Fraction(self.prob)
        if not 0 <= p <= 1:
            raise ValueError(f"probability bound {p} outside [0, 1]")
        object.__setattr__(self, "prob", p)


@dataclass(frozen=True)
class Updated:
    updates: tuple[Update, ...]
    body: "Formula"

    def __post_init__(self):
        ups = tuple(self.updates)
        body = self.body
        # {U1}{U2}phi is kept as one list [U1, U2]
        while isinstance(body, Updated):
            ups += body.updates
            body = body.body
        object.__setattr__(self, "updates", ups)
        object.__setattr__(self, "body", body)


StateFormula = Union[Atom, Not, And, ForallRange]
Formula = Union[Atom, Not, And, ForallRange, Box, Updated]

F_TRUE = Atom(TRUE)
F_FALSE = Atom(FALSE)


def Or(a: Formula, b: Formula) -> Formula:
    return Not(And(Not(a), Not(b)))


def Implies(a: Formula, b: Formula) -> Formula:
    return Not(And(a, Not(b)))


def Exists(var: str, lo: int, hi: int, body: Formula) -> Formula:
    return Not(ForallRange(var, lo, hi, Not(body)))


def conj(formulas: Sequence[Formula]) -> Formula:
    formulas = list(formulas)
    if not formulas:
        return F_TRUE
    result = formulas[-1]
    for f in reversed(formulas[:-1]):
        result = And(f, result)
    return result


def conjuncts(f: Formula) -> list[Formula]:
    if isinstance(f, And):
        return conjuncts(f.left) + conjuncts(f.right)
    return [f]


def is_state_formula(f: Formula) -> bool:
    if isinstance(f, Atom):
        return True
    if isinstance(f, Not):
        return is_state_formula(f.body)
    if isinstance(f, And):
        return is_state_formula(f.left) and is_state_formula(f.right)
    if isinstance(f, ForallRange):
        return is_state_formula(f.body)
    return False


def formula_vars(f: Formula) -> set[str]:
    """Free program variables of a state formula."""
    if isinstance(f, Atom):
        return expr_vars(f.expr)
    if isinstance(f, Not):
        return formula_vars(f.body)
    if isinstance(f, And):
        return formula_vars(f.left) | formula_vars(f.right)
    if isinstance(f, ForallRange):
        return formula_vars(f.body) - {f.var}
    raise TypeError(f"not a state formula: {f!r}")


# --- substitution and simplification -----------------------------------------

def substitute_expr(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Unary):
        return Unary(e.op, substitute_expr(e.operand, mapping))
    if isinstance(e, Binary):
        return Binary(e.op, substitute_expr(e.left, mapping), substitute_expr(e.right, mapping))
    return e


def simplify_expr(e: Expr) -> Expr:
    """Fold constant subterms. Subterms whose evaluation fails are kept."""
    if isinstance(e, Unary):
        a = simplify_expr(e.operand)
        if isinstance(a, Lit):
            try:
                return Lit(apply_unary(e.op, a.value))
            except EvalError:
                pass
        return Unary(e.op, a)
    if isinstance(e, Binary):
        a, b = simplify_expr(e.left), simplify_expr(e.right)
        if isinstance(a, Lit) and isinstance(b, Lit):
            try:
                return Lit(apply_binary(e.op, a.value, b.value))
            except EvalError:
                pass
        return Binary(e.op, a, b)
    return e


def compose_updates(updates: Sequence[Update]) -> dict[str, Expr]:
    """Accumulated substitution of an update list (terms over the initial state)."""
    acc: dict[str, Expr] = {}
    for u in updates:
        acc[u.name] = substitute_expr(u.term, acc)
    return acc


def apply_update_to_state(updates: Sequence[Update], env: Mapping[str, Value]) -> Valuation:
    if not isinstance(env, Valuation):
        env = Valuation(env)
    for u in updates:
        env = env.set(u.name, eval_expr(u.term, env))
    return env


def apply_update_to_expr(updates: Sequence[Update], e: Expr, simplify: bool = True) -> Expr:
    if not updates:
        return e
    result = substitute_expr(e, compose_updates(updates))
    return simplify_expr(result) if simplify else result


def expand_quantifiers(f: Formula) -> Formula:
    """Replace every ``ForallRange`` by the finite conjunction of its instances."""
    if isinstance(f, Atom):
        return f
    if isinstance(f, Not):
        return Not(expand_quantifiers(f.body))
    if isinstance(f, And):
        return And(expand_quantifiers(f.left), expand_quantifiers(f.right))
    if isinstance(f, ForallRange):
        body = expand_quantifiers(f.body)
        return conj([substitute_formula(body, {f.var: Lit(i)})
                     for i in range(f.lo, f.hi + 1)])
    if isinstance(f, Box):
        return Box(f.program, f.prob, expand_quantifiers(f.body))
    if isinstance(f, Updated):
        return Updated(f.updates, expand_quantifiers(f.body))
    raise TypeError(f"not a formula: {f!r}")


def substitute_formula(f: Formula, mapping: Mapping[str, Expr], simplify: bool = False) -> Formula:
    """Capture-avoiding substitution on a state formula."""
    if isinstance(f, Atom):
        e = substitute_expr(f.expr, mapping)
        return Atom(simplify_expr(e) if simplify else e)
    if isinstance(f, Not):
        return Not(substitute_formula(f.body, mapping, simplify))
    if isinstance(f, And):
        return And(substitute_formula(f.left, mapping, simplify),
                   substitute_formula(f.right, mapping, simplify))
    if isinstance(f, ForallRange):
        inner = {k: v for k, v in mapping.items() if k != f.var}
        if any(f.var in expr_vars(t) for t in inner.values()):
            return substitute_formula(expand_quantifiers(f), mapping, simplify)
        return ForallRange(f.var, f.lo, f.hi, substitute_formula(f.body, inner, simplify))
    raise TypeError(f"not a state formula: {f!r}")


def apply_update_to_formula(updates: Sequence[Update], f: Formula, simplify: bool = True) -> Formula:
    if not updates:
        return f
    return substitute_formula(f, compose_updates(updates), simplify)


def simplify_formula(f: Formula) -> Formula:
    """Constant-fold atoms and propagate literal truth values through connectives."""
    if isinstance(f, Atom):
        return Atom(simplify_expr(f.expr))
    if isinstance(f, Not):
        b = simplify_formula(f.body)
        if b == F_TRUE:
            return F_FALSE
        if b == F_FALSE:
            return F_TRUE
        if isinstance(b, Not):
            return b.body
        return Not(b)
    if isinstance(f, And):
        a, b = simplify_formula(f.left), simplify_formula(f.right)
        if a == F_FALSE or b == F_FALSE:
            return F_FALSE
        if a == F_TRUE:
            return b
        if b == F_TRUE:
            return a
        return And(a, b)
    if isinstance(f, ForallRange):
        if f.lo > f.hi:
            return F_TRUE
        return ForallRange(f.var, f.lo, f.hi, simplify_formula(f.body))
    raise TypeError(f"not a state formula: {f!r}")


# --- satisfaction -----------------------------------------------------------

def sat_state_formula(env: Mapping[str, Value], f: Formula) -> bool:
    if isinstance(f, Atom):
        v = eval_expr(f.expr, env)
        if type(v) is not bool:
            raise TypeMismatch("atom", "int")
        return v
    if isinstance(f, Not):
        return not sat_state_formula(env, f.body)
    if isinstance(f, And):
        return sat_state_formula(env, f.left) and sat_state_formula(env, f.right)
    if isinstance(f, ForallRange):
        return all(sat_state_formula(update_valuation(env, f.var, i), f.body)
                   for i in range(f.lo, f.hi + 1))
    raise TypeError(f"not a state formula: {f!r}")


def sat_pdl(env: Mapping[str, Value], f: Formula, budget: int = 0) -> bool:
    """Satisfaction of a pDL formula; p-boxes are decided by the MDP oracle.

    Raises ``InexactBudget`` when a loop was cut off by ``budget`` and the
    remaining probability mass could tip the comparison either way.
    """
    if isinstance(f, Atom):
        return sat_state_formula(env, f)
    if isinstance(f, Not):
        return not sat_pdl(env, f.body, budget)
    if isinstance(f, And):
        return sat_pdl(env, f.left, budget) and sat_pdl(env, f.right, budget)
    if isinstance(f, ForallRange):
        return all(sat_pdl(update_valuation(env, f.var, i), f.body, budget)
                   for i in range(f.lo, f.hi + 1))
    if isinstance(f, Updated):
        return sat_pdl(apply_update_to_state(f.updates, env), f.body, budget)
    if isinstance(f, Box):
        from .oracle import expectation
        res = expectation(f.program, env, f.body, budget)
        if f.prob <= res.lower_bound:
            return True
        if f.prob > res.lower_bound + res.residual_mass:
            return False
        raise InexactBudget(
            f"bound {f.prob} lies in [{res.lower_bound}, "
            f"{res.lower_bound + res.residual_mass}]; raise the unroll budget")
    raise TypeError(f"not a formula: {f!r}")

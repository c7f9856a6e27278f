"""Operational MDP semantics of pGCL and exact worst-case expectations.

A configuration is a pair of a valuation and the remaining program; it is
final when the program is ``skip``. ``step`` exposes the successor structure
of one configuration: a deterministic move, a demonic pair (resolved by the
caller), or a probabilistic distribution.

``expectation`` computes the infimum over demonic resolutions of the
probability of terminating in a state satisfying a formula. Loops are
bounded by an unroll budget: a path that would take a loop iteration beyond
the budget is cut off, contributes nothing to the lower bound and is
reported as residual mass instead.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Union

from .errors import ProbOutOfRange, TypeMismatch
from .formula import Formula, sat_state_formula
from .pgcl import (SKIP, Assign, Demonic, If, Prob, Seq, Skip, Stmt, Valuation, Value,
                   While, eval_expr, type_name)


@dataclass(frozen=True)
class Config:
    env: Valuation
    program: Stmt

    @property
    def final(self) -> bool:
        return isinstance(self.program, Skip)


@dataclass(frozen=True)
class Final:
    pass


@dataclass(frozen=True)
class Det:
    next: Config
    unroll: bool = False  # True for a While1 transition


@dataclass(frozen=True)
class DemonicSucc:
    left: Config
    right: Config


@dataclass(frozen=True)
class ProbSucc:
    branches: tuple[tuple[Fraction, Config], ...]


Successors = Union[Final, Det, DemonicSucc, ProbSucc]


def _guard(cond, env) -> bool:
    v = eval_expr(cond, env)
    if type(v) is not bool:
        raise TypeMismatch("guard", type_name(v))
    return v


def step(c: Config) -> Successors:
    s, env = c.program, c.env
    if isinstance(s, Skip):
        return Final()
    if isinstance(s, Assign):
        return Det(Config(env.set(s.name, eval_expr(s.expr, env)), SKIP))
    if isinstance(s, Seq):
        if isinstance(s.first, Skip):
            return Det(Config(env, s.rest))
        inner = step(Config(env, s.first))

        def cont(x: Config) -> Config:
            return Config(x.env, Seq(x.program, s.rest))

        if isinstance(inner, Det):
            return Det(cont(inner.next), inner.unroll)
        if isinstance(inner, DemonicSucc):
            return DemonicSucc(cont(inner.left), cont(inner.right))
        return ProbSucc(tuple((p, cont(x)) for p, x in inner.branches))
    if isinstance(s, Demonic):
        return DemonicSucc(Config(env, s.left), Config(env, s.right))
    if isinstance(s, Prob):
        if not 0 <= s.prob <= 1:
            raise ProbOutOfRange(s.prob)
        return ProbSucc(((s.prob, Config(env, s.left)), (1 - s.prob, Config(env, s.right))))
    if isinstance(s, If):
        return Det(Config(env, s.then if _guard(s.cond, env) else s.orelse))
    if isinstance(s, While):
        if _guard(s.cond, env):
            return Det(Config(env, Seq(s.body, s)), unroll=True)
        return Det(Config(env, SKIP))
    raise TypeError(f"not a statement: {s!r}")


@dataclass(frozen=True)
class OracleResult:
    """The true expectation lies in ``[lower_bound, lower_bound + residual_mass]``."""

    lower_bound: Fraction
    residual_mass: Fraction

    @property
    def exact(self) -> bool:
        return self.residual_mass == 0

    @property
    def upper_bound(self) -> Fraction:
        return self.lower_bound + self.residual_mass


def _as_valuation(env: Mapping[str, Value]) -> Valuation:
    return env if isinstance(env, Valuation) else Valuation(env)


def expectation(s: Stmt, env: Mapping[str, Value], post: Formula, budget: int = 0,
                memo: bool = True) -> OracleResult:
    if budget < 0:
        raise ValueError("unroll budget must be >= 0")
    table: dict[tuple[Config, int], tuple[Fraction, Fraction]] = {}
    zero, one = Fraction(0), Fraction(1)

    def value(cfg: Config, b: int) -> tuple[Fraction, Fraction]:
        key = (cfg, b)
        if memo and key in table:
            return table[key]
        while True:
            succ = step(cfg)
            if isinstance(succ, Det):
                if succ.unroll:
                    if b == 0:
                        result = (zero, one)
                        break
                    b -= 1
                cfg = succ.next
                continue
            if isinstance(succ, Final):
                result = (one if sat_state_formula(cfg.env, post) else zero, zero)
            elif isinstance(succ, DemonicSucc):
                l1, r1 = value(succ.left, b)
                l2, r2 = value(succ.right, b)
                lb = min(l1, l2)
                result = (lb, min(l1 + r1, l2 + r2) - lb)
            else:
                lb = res = zero
                for p, nxt in succ.branches:
                    if p == 0:
                        continue
                    l, r = value(nxt, b)
                    lb += p * l
                    res += p * r
                result = (lb, res)
            break
        if memo:
            table[key] = result
        return result

    lb, res = value(Config(_as_valuation(env), s), budget)
    return OracleResult(lb, res)


@dataclass(frozen=True)
class Path:
    probability: Fraction
    final: Valuation
    truncated: bool
    resolution: str  # demonic decisions of the whole resolution, in DFS order


def _resolutions(cfg: Config, b: int) -> list[tuple[str, list[tuple[Fraction, Valuation, bool]]]]:
    while True:
        succ = step(cfg)
        if isinstance(succ, Det):
            if succ.unroll:
                if b == 0:
                    return [("", [(Fraction(1), cfg.env, True)])]
                b -= 1
            cfg = succ.next
            continue
        break
    if isinstance(succ, Final):
        return [("", [(Fraction(1), cfg.env, False)])]
    if isinstance(succ, DemonicSucc):
        out = []
        for i, nxt in enumerate((succ.left, succ.right)):
            out.extend((str(i) + label, paths) for label, paths in _resolutions(nxt, b))
        return out
    per_branch = []
    for p, nxt in succ.branches:
        if p == 0:
            continue
        per_branch.append([(label, [(p * q, e, t) for q, e, t in paths])
                           for label, paths in _resolutions(nxt, b)])
    out = []
    for combo in itertools.product(*per_branch):
        out.append(("".join(label for label, _ in combo),
                    [path for _, paths in combo for path in paths]))
    return out


def enumerate_paths(s: Stmt, env: Mapping[str, Value], budget: int = 0) -> list[Path]:
    """All paths of every demonic resolution.

    A path shared by several resolutions appears once per resolution; group
    with ``group_by_resolution``.
    """
    out = []
    for label, paths in _resolutions(Config(_as_valuation(env), s), budget):
        out.extend(Path(p, e, t, label) for p, e, t in paths)
    return out


def group_by_resolution(paths: list[Path]) -> dict[str, list[Path]]:
    groups: dict[str, list[Path]] = {}
    for p in paths:
        groups.setdefault(p.resolution, []).append(p)
    return groups


def expected_reward(paths: list[Path], post: Formula) -> Fraction:
    return sum((p.probability for p in paths
                if not p.truncated and sat_state_formula(p.final, post)), Fraction(0))

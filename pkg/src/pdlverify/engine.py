"""Forward symbolic execution building a proof tree with probability constraints.

A judgment ``gamma |- {U} [s]_p phi`` is reduced by the rule selected by the
first statement of ``s``:

========================  =========================================================
skip; s                   ``skip``: continue with ``s``
x := e; s                 ``assign``: append ``x -> e`` to ``U``
{s1} [] ... [] {sn}; s    ``demonChoice``: ``p <= min(p1, ..., pn)``
{s1} [q] {s2}; s          ``probChoice``: ``p <= q*p1 + (1-q)*p2``
if (e) {s1} else {s2}; s  ``if``: both children keep ``p``, Gamma gains ``U(e)`` / ``!U(e)``
while (e) {b}; s          ``loopUnroll``: one unfolding, consumes one unit of budget
skip                      ``empty1`` (``p = 1``) if ``gamma -> U(phi)`` is valid, else ``empty0``
========================  =========================================================

Derived rules: ``closeInfeasible`` closes a branch whose Gamma is
unsatisfiable and leaves its variable unconstrained; ``budgetExhausted`` pins
``p = 0`` at a loop that may still iterate when the budget is used up;
``caseSplit`` splits the root over the values of a finite-domain input so that
leaf constants can be exact per valuation (children share ``p``).

Nested demonic choices are flattened into one n-ary ``min`` node.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

from .constraints import ROOT, AffineUB, LeafEq, MinUB, ProbConstraint, ProbVar
from .errors import Undecided, UnsupportedConstruct
from .formula import (Atom, Formula, Not, Update, apply_update_to_expr, apply_update_to_formula,
                      conjuncts)
from .pgcl import (SKIP, Assign, Binary, Demonic, If, Lit, Prob, Skip, Stmt, Value, Var, While,
                   free_vars, seq, split_first, then_do)
from .printer import format_formula, format_stmt
from .validity import check_validity, is_satisfiable, pinned_value

RULES = ("skip", "assign", "empty1", "empty0", "demonChoice", "probChoice", "if",
         "loopUnroll", "closeInfeasible", "budgetExhausted", "caseSplit")

LEAF_RULES = ("empty1", "empty0", "closeInfeasible", "budgetExhausted")


@dataclass(frozen=True)
class Judgment:
    gamma: tuple[Formula, ...]
    updates: tuple[Update, ...]
    program: Stmt
    pvar: ProbVar
    post: Formula

    def with_(self, **changes) -> "Judgment":
        fields = dict(gamma=self.gamma, updates=self.updates, program=self.program,
                      pvar=self.pvar, post=self.post)
        fields.update(changes)
        return Judgment(**fields)


@dataclass(frozen=True)
class ProofNode:
    judgment: Judgment
    rule: str
    children: tuple["ProofNode", ...] = ()
    emitted: tuple[ProbConstraint, ...] = ()
    undecided: str | None = None  # reason, when the leaf check was undecided

    def walk(self) -> Iterator["ProofNode"]:
        """Pre-order traversal (iterative, so deep trees are fine)."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


def collect_constraints(root: ProofNode) -> list[ProbConstraint]:
    return [c for node in root.walk() for c in node.emitted]


def budget_exhausted(root: ProofNode) -> bool:
    return any(n.rule == "budgetExhausted" for n in root.walk())


def undecided_leaves(root: ProofNode) -> list[ProofNode]:
    return [n for n in root.walk() if n.undecided is not None]


def _demonic_operands(s: Stmt) -> list[Stmt]:
    if isinstance(s, Demonic):
        return _demonic_operands(s.left) + _demonic_operands(s.right)
    return [s]


class _Executor:
    def __init__(self, domains: Mapping[str, Sequence[Value]]):
        self.domains = domains
        self.next_index: dict[ProbVar, int] = {}

    def fresh(self, parent: ProbVar, n: int) -> list[ProbVar]:
        # children of if/caseSplit share their parent's variable, so numbering
        # continues where an earlier sibling subtree stopped
        start = self.next_index.get(parent, 0)
        self.next_index[parent] = start + n
        return [parent.child(start + i) for i in range(n)]

    def feasible(self, gamma: Sequence[Formula]) -> bool:
        try:
            return is_satisfiable(gamma, self.domains)
        except Undecided:
            return True

    def run(self, j: Judgment, budget: int, check: bool = False,
            from_loop: bool = False) -> ProofNode:
        if check and not self.feasible(j.gamma):
            return ProofNode(j, "closeInfeasible")
        head, rest = split_first(j.program)

        if isinstance(head, Skip):
            if rest is not None:
                return ProofNode(j, "skip", (self.run(j.with_(program=rest), budget),))
            return self.leaf(j)

        if isinstance(head, Assign):
            child = j.with_(updates=j.updates + (Update(head.name, head.expr),),
                            program=rest if rest is not None else SKIP)
            return ProofNode(j, "assign", (self.run(child, budget),))

        if isinstance(head, Demonic):
            ops = _demonic_operands(head)
            pvs = self.fresh(j.pvar, len(ops))
            kids = tuple(self.run(j.with_(program=then_do(s, rest), pvar=pv), budget)
                         for s, pv in zip(ops, pvs))
            return ProofNode(j, "demonChoice", kids, (MinUB(j.pvar, tuple(pvs)),))

        if isinstance(head, Prob):
            left, right = self.fresh(j.pvar, 2)
            kids = (self.run(j.with_(program=then_do(head.left, rest), pvar=left), budget),
                    self.run(j.with_(program=then_do(head.right, rest), pvar=right), budget))
            return ProofNode(j, "probChoice", kids,
                             (AffineUB(j.pvar, head.prob, left, right),))

        if isinstance(head, If):
            guard = Atom(apply_update_to_expr(j.updates, head.cond))
            then_j = j.with_(gamma=j.gamma + (guard,), program=then_do(head.then, rest))
            else_j = j.with_(gamma=j.gamma + (Not(guard),), program=then_do(head.orelse, rest))
            then_budget = budget - 1 if from_loop else budget
            if then_budget < 0:
                # reached only after the loop exit was proven, see loopUnroll
                then_node = ProofNode(then_j, "closeInfeasible")
            else:
                then_node = self.run(then_j, then_budget, check=True)
            return ProofNode(j, "if", (then_node, self.run(else_j, budget, check=True)))

        if isinstance(head, While):
            if budget == 0 and not self.loop_exits(j, head):
                return ProofNode(j, "budgetExhausted", (), (LeafEq(j.pvar, 0),))
            unrolled = If(head.cond, then_do(seq(head.body, head), rest),
                          rest if rest is not None else SKIP)
            child = self.run(j.with_(program=unrolled), budget, from_loop=True)
            return ProofNode(j, "loopUnroll", (child,))

        raise UnsupportedConstruct(f"cannot execute {head!r}")

    def loop_exits(self, j: Judgment, loop: While) -> bool:
        guard = Atom(apply_update_to_expr(j.updates, loop.cond))
        try:
            return check_validity(j.gamma, Not(guard), self.domains)
        except Undecided:
            return False

    def leaf(self, j: Judgment) -> ProofNode:
        goal = apply_update_to_formula(j.updates, j.post)
        try:
            valid = check_validity(j.gamma, goal, self.domains)
        except Undecided as e:
            return ProofNode(j, "empty0", (), (LeafEq(j.pvar, 0),), undecided=str(e))
        if valid:
            return ProofNode(j, "empty1", (), (LeafEq(j.pvar, 1),))
        return ProofNode(j, "empty0", (), (LeafEq(j.pvar, 0),))

    def split(self, j: Judgment, budget: int, names: Sequence[str]) -> ProofNode:
        if not names:
            return self.run(j, budget)
        name, more = names[0], names[1:]
        kids = []
        for v in self.domains[name]:
            child = j.with_(gamma=j.gamma + (Atom(Binary("==", Var(name), Lit(v))),))
            if self.feasible(child.gamma):
                kids.append(self.split(child, budget, more))
            else:
                kids.append(ProofNode(child, "closeInfeasible"))
        return ProofNode(j, "caseSplit", tuple(kids))


def execute(j: Judgment, budget: int = 8,
            domains: Mapping[str, Sequence[Value]] | None = None,
            split: Sequence[str] = ()) -> ProofNode:
    """Build the proof tree for ``j``.

    ``domains`` gives finite value ranges used by the validity checker;
    ``split`` lists variables (with a domain) to case-split on first.
    """
    if budget < 0:
        raise ValueError("unroll budget must be >= 0")
    domains = dict(domains or {})
    missing = [n for n in split if n not in domains]
    if missing:
        raise ValueError(f"cannot split on {missing}: no finite domain")
    ex = _Executor(domains)
    if split:
        if not ex.feasible(j.gamma):
            return ProofNode(j, "closeInfeasible")
        return ex.split(j, budget, list(split))
    return ex.run(j, budget, check=True)


def root_judgment(task) -> Judgment:
    return Judgment(tuple(conjuncts(task.assume)), (), task.body, ROOT, task.ensures)


def split_candidates(task) -> list[str]:
    """Finite-domain inputs that the program or postcondition read and that
    ``@assume`` does not already pin to a single value."""
    from .formula import formula_vars
    used = free_vars(task.body) | formula_vars(task.ensures)
    pinned = {p[0] for g in conjuncts(task.assume) if (p := pinned_value(g)) is not None}
    return [d.name for d in task.inputs
            if d.domain() is not None and d.name in used and d.name not in pinned]


def execute_task(task, budget: int = 8, split_inputs: bool = True) -> ProofNode:
    domains = task.domains()
    split = split_candidates(task) if split_inputs else []
    return execute(root_judgment(task), budget, domains, split)


# --- reports ----------------------------------------------------------------

def _judgment_summary(j: Judgment, width: int = 60) -> str:
    gamma = ", ".join(format_formula(g) for g in j.gamma) or "."
    ups = ", ".join(str(u) for u in j.updates)
    prog = format_stmt(j.program)
    if len(prog) > width:
        prog = prog[:width - 3] + "..."
    return f"{gamma} |- {{{ups}}} [{prog}]_{j.pvar} {format_formula(j.post)}"


def format_tree(root: ProofNode) -> str:
    """One line per node: rule, judgment, emitted constraints."""
    lines = []
    stack = [(root, 0)]
    while stack:
        node, depth = stack.pop()
        line = f"{'  ' * depth}{node.rule}: {_judgment_summary(node.judgment)}"
        if node.emitted:
            line += "  ==> " + "; ".join(map(str, node.emitted))
        if node.undecided is not None:
            line += f"  (undecided: {node.undecided})"
        lines.append(line)
        stack.extend((c, depth + 1) for c in reversed(node.children))
    return "\n".join(lines) + "\n"


def tree_to_dict(node: ProofNode) -> dict:
    j = node.judgment
    return {
        "rule": node.rule,
        "gamma": [format_formula(g) for g in j.gamma],
        "updates": [str(u) for u in j.updates],
        "program": format_stmt(j.program),
        "pvar": str(j.pvar),
        "constraints": [str(c) for c in node.emitted],
        "children": [tree_to_dict(c) for c in node.children],
    }


def tree_to_json(root: ProofNode) -> str:
    return json.dumps(tree_to_dict(root), indent=2) + "\n"

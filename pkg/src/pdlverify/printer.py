"""Concrete-syntax rendering of expressions, statements, formulas and tasks.

Output is accepted by the parser and reparses to the same tree for every
tree the parser itself can produce.
"""

from __future__ import annotations

from fractions import Fraction

from .formula import And, Atom, Box, ForallRange, Formula, Not, Updated
from .pgcl import (Assign, Binary, Demonic, Expr, If, Lit, Prob, Seq, Skip, Stmt,
                   Unary, Var, While, flatten_seq, format_value)

BINARY_PREC = {
    "||": 1, "&&": 2,
    "==": 3, "!=": 3,
    "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5,
    "*": 6, "/": 6, "%": 6,
}
UNARY_PREC = 7
ATOM_PREC = 8


def expr_prec(e: Expr) -> int:
    if isinstance(e, Binary):
        return BINARY_PREC[e.op]
    if isinstance(e, Unary):
        return UNARY_PREC
    if isinstance(e, Lit) and type(e.value) is int and e.value < 0:
        return UNARY_PREC
    return ATOM_PREC


def _wrap(e: Expr, min_prec: int) -> str:
    s = format_expr(e)
    return s if expr_prec(e) >= min_prec else f"({s})"


def format_expr(e: Expr) -> str:
    if isinstance(e, Lit):
        return format_value(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        if isinstance(e.operand, Lit):
            # "-1" would parse back as a negative literal
            return f"{e.op}({format_expr(e.operand)})"
        return e.op + _wrap(e.operand, UNARY_PREC)
    if isinstance(e, Binary):
        p = BINARY_PREC[e.op]
        return f"{_wrap(e.left, p)} {e.op} {_wrap(e.right, p + 1)}"
    raise TypeError(f"not an expression: {e!r}")


def format_prob(p: Fraction) -> str:
    p = Fraction(p)
    return str(p.numerator) if p.denominator == 1 else f"{p.numerator}/{p.denominator}"


def format_ratio(p: Fraction) -> str:
    """Always ``a/b``, the machine-readable form used in JSON output."""
    p = Fraction(p)
    return f"{p.numerator}/{p.denominator}"


# --- formulas ---------------------------------------------------------------

def _formula_prec(f: Formula) -> int:
    if isinstance(f, (ForallRange, Box, Updated)):
        return 0
    if isinstance(f, And):
        return 1
    if isinstance(f, Not):
        return 2
    return 3


def _fwrap(f: Formula, min_prec: int) -> str:
    s = format_formula(f)
    return s if _formula_prec(f) >= min_prec else f"({s})"


def format_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        s = format_expr(f.expr)
        top_level_logic = (isinstance(f.expr, Binary) and f.expr.op in ("&&", "||")) or (
            isinstance(f.expr, Unary) and f.expr.op == "!")
        if top_level_logic:
            return f"({s})"
        if s.startswith("!"):
            # a leading "!" would be read as formula negation of the whole comparison
            lead = f.expr
            while isinstance(lead, Binary):
                lead = lead.left
            t = format_expr(lead)
            s = f"({t})" + s[len(t):]
        return s
    if isinstance(f, Not):
        if isinstance(f.body, Atom) and expr_prec(f.body.expr) < ATOM_PREC:
            return f"!({format_formula(f.body)})"
        return "!" + _fwrap(f.body, 2)
    if isinstance(f, And):
        return f"{_fwrap(f.left, 1)} && {_fwrap(f.right, 2)}"
    if isinstance(f, ForallRange):
        return f"forall {f.var} in [{f.lo}..{f.hi}] : {format_formula(f.body)}"
    if isinstance(f, Box):
        return f"[{format_stmt(f.program)}]_{format_prob(f.prob)} ({format_formula(f.body)})"
    if isinstance(f, Updated):
        ups = ", ".join(str(u) for u in f.updates)
        return f"{{{ups}}} ({format_formula(f.body)})"
    raise TypeError(f"not a formula: {f!r}")


# --- statements -------------------------------------------------------------

def _block_lines(s: Stmt, indent: int) -> list[str]:
    lines = []
    for part in flatten_seq(s):
        lines.extend(_stmt_lines(part, indent))
    return lines


def _inline_block(s: Stmt) -> str:
    return "{ " + format_stmt(s) + " }"


def _stmt_lines(s: Stmt, indent: int) -> list[str]:
    pad = "  " * indent
    if isinstance(s, Skip):
        return [pad + "skip;"]
    if isinstance(s, Assign):
        return [pad + f"{s.name} := {format_expr(s.expr)};"]
    if isinstance(s, Seq):
        return _block_lines(s, indent)
    if isinstance(s, Demonic):
        return [pad + f"{_inline_block(s.left)} [] {_inline_block(s.right)}"]
    if isinstance(s, Prob):
        return [pad + f"{_inline_block(s.left)} [{format_prob(s.prob)}] {_inline_block(s.right)}"]
    if isinstance(s, If):
        return ([pad + f"if ({format_expr(s.cond)}) {{"]
                + _block_lines(s.then, indent + 1)
                + [pad + "} else {"]
                + _block_lines(s.orelse, indent + 1)
                + [pad + "}"])
    if isinstance(s, While):
        return ([pad + f"while ({format_expr(s.cond)}) {{"]
                + _block_lines(s.body, indent + 1)
                + [pad + "}"])
    raise TypeError(f"not a statement: {s!r}")


def format_stmt(s: Stmt) -> str:
    """Single-line rendering."""
    if isinstance(s, If):
        return (f"if ({format_expr(s.cond)}) {_inline_block(s.then)} "
                f"else {_inline_block(s.orelse)}")
    if isinstance(s, While):
        return f"while ({format_expr(s.cond)}) {_inline_block(s.body)}"
    if isinstance(s, Seq):
        return " ".join(format_stmt(p) for p in flatten_seq(s))
    return _stmt_lines(s, 0)[0]


def format_program(s: Stmt, indent: int = 0) -> str:
    """Multi-line rendering, one statement per line."""
    return "\n".join(_block_lines(s, indent))


def format_task(task) -> str:
    lines = []
    for decl in task.inputs:
        lines.append(f"@input {decl}")
    lines.append(f"@assume {format_formula(task.assume)}")
    lines.append(f"@ensures {format_formula(task.ensures)}")
    lines.append(f"@prob {format_prob(task.prob)}")
    lines.append("{")
    lines.append(format_program(task.body, 1))
    lines.append("}")
    return "\n".join(lines) + "\n"

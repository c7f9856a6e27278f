"""Abstract syntax of pGCL programs, valuations and concrete evaluation.

Values are Python ``bool`` and ``int``. Because ``bool`` subclasses ``int``
every type test below uses ``type(v) is ...`` rather than ``isinstance``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Union

from .errors import DivisionByZero, TypeMismatch, UnboundVariable

Value = Union[bool, int]

ARITH_OPS = frozenset({"+", "-", "*", "/", "%"})
ORDER_OPS = frozenset({"<", "<=", ">", ">="})
EQUALITY_OPS = frozenset({"==", "!="})
LOGIC_OPS = frozenset({"&&", "||"})
BINARY_OPS = ARITH_OPS | ORDER_OPS | EQUALITY_OPS | LOGIC_OPS
UNARY_OPS = frozenset({"-", "!"})


def type_name(v: Value) -> str:
    return "bool" if type(v) is bool else "int"


def check_value(v) -> Value:
    if type(v) is bool or type(v) is int:
        return v
    raise TypeError(f"not a pGCL value: {v!r}")


# --- expressions ------------------------------------------------------------

@dataclass(frozen=True)
class Lit:
    value: Value

    def __post_init__(self):
        check_value(self.value)

    def __eq__(self, other):
        # keep True and 1 apart
        return (type(other) is Lit and type(self.value) is type(other.value)
                and self.value == other.value)

    def __hash__(self):
        return hash((Lit, type(self.value), self.value))


@dataclass(frozen=True)
class Var:
    name: str

    def __post_init__(self):
        if not self.name:
            raise ValueError("empty identifier")


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"

    def __post_init__(self):
        if self.op not in UNARY_OPS:
            raise ValueError(f"unknown unary operator {self.op!r}")


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"

    def __post_init__(self):
        if self.op not in BINARY_OPS:
            raise ValueError(f"unknown binary operator {self.op!r}")


Expr = Union[Lit, Var, Unary, Binary]

TRUE = Lit(True)
FALSE = Lit(False)


# --- statements -------------------------------------------------------------

@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Assign:
    name: str
    expr: Expr


@dataclass(frozen=True)
class Seq:
    first: "Stmt"
    rest: "Stmt"


@dataclass(frozen=True)
class Demonic:
    left: "Stmt"
    right: "Stmt"


@dataclass(frozen=True)
class Prob:
    """``{left} [prob] {right}``; ``prob`` is a state-independent constant."""

    prob: Fraction
    left: "Stmt"
    right: "Stmt"

    def __post_init__(self):
        object.__setattr__(self, "prob", Fraction(self.prob))


@dataclass(frozen=True)
class If:
    cond: Expr
    then: "Stmt"
    orelse: "Stmt"


@dataclass(frozen=True)
class While:
    cond: Expr
    body: "Stmt"


Stmt = Union[Skip, Assign, Seq, Demonic, Prob, If, While]

SKIP = Skip()


def seq(*stmts: Stmt) -> Stmt:
    """Right-nested sequential composition; ``seq()`` is ``skip``."""
    if not stmts:
        return SKIP
    result = stmts[-1]
    for s in reversed(stmts[:-1]):
        result = Seq(s, result)
    return result


def flatten_seq(s: Stmt) -> list[Stmt]:
    if isinstance(s, Seq):
        return flatten_seq(s.first) + flatten_seq(s.rest)
    return [s]


def split_first(s: Stmt) -> tuple[Stmt, Stmt | None]:
    """Decompose ``s`` into its first non-sequence statement and the rest."""
    if not isinstance(s, Seq):
        return s, None
    first, rest = s.first, s.rest
    while isinstance(first, Seq):
        first, rest = first.first, Seq(first.rest, rest)
    return first, rest


def then_do(s: Stmt, rest: Stmt | None) -> Stmt:
    return s if rest is None else Seq(s, rest)


# --- valuations -------------------------------------------------------------

class Valuation(Mapping[str, Value]):
    """Immutable, hashable map from variable names to values."""

    __slots__ = ("_data", "_hash")

    def __init__(self, data: Mapping[str, Value] | Iterable[tuple[str, Value]] = ()):
        d = dict(data)
        for v in d.values():
            check_value(v)
        self._data = d
        self._hash = None

    def __getitem__(self, name: str) -> Value:
        return self._data[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._data)

    def __len__(self) -> int:
        return len(self._data)

    def _key(self):
        return frozenset((k, type(v), v) for k, v in self._data.items())

    def __eq__(self, other):
        if isinstance(other, Valuation):
            return self._key() == other._key()
        if isinstance(other, Mapping):
            return self._key() == Valuation(other)._key()
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._key())
        return self._hash

    def __repr__(self):
        return f"Valuation({self._data!r})"

    def __str__(self):
        return "{" + ", ".join(f"{k}: {format_value(v)}" for k, v in sorted(self._data.items())) + "}"

    def set(self, name: str, value: Value) -> "Valuation":
        d = dict(self._data)
        d[name] = check_value(value)
        return Valuation(d)


def update_valuation(env: Mapping[str, Value], name: str, value: Value) -> Valuation:
    """Return ``env[name := value]``; ``env`` itself is left untouched."""
    if not isinstance(env, Valuation):
        env = Valuation(env)
    return env.set(name, value)


def format_value(v: Value) -> str:
    if type(v) is bool:
        return "true" if v else "false"
    return str(v)


# --- evaluation -------------------------------------------------------------

def euclid_divmod(a: int, b: int) -> tuple[int, int]:
    """Euclidean division: ``0 <= r < |b|`` and ``a == q*b + r``."""
    r = a % abs(b)
    return (a - r) // b, r


def _want_int(op: str, *vals: Value) -> None:
    for v in vals:
        if type(v) is not int:
            raise TypeMismatch(op, " and ".join(type_name(x) for x in vals))


def _want_bool(op: str, *vals: Value) -> None:
    for v in vals:
        if type(v) is not bool:
            raise TypeMismatch(op, " and ".join(type_name(x) for x in vals))


def apply_unary(op: str, v: Value) -> Value:
    if op == "-":
        _want_int(op, v)
        return -v
    _want_bool(op, v)
    return not v


def apply_binary(op: str, a: Value, b: Value) -> Value:
    if op in ARITH_OPS:
        _want_int(op, a, b)
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if b == 0:
            raise DivisionByZero(op)
        q, r = euclid_divmod(a, b)
        return q if op == "/" else r
    if op in ORDER_OPS:
        _want_int(op, a, b)
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        return a >= b
    if op in EQUALITY_OPS:
        if type(a) is not type(b):
            raise TypeMismatch(op, f"{type_name(a)} and {type_name(b)}")
        return (a == b) if op == "==" else (a != b)
    _want_bool(op, a, b)
    return (a and b) if op == "&&" else (a or b)


def eval_expr(e: Expr, env: Mapping[str, Value]) -> Value:
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise UnboundVariable(e.name) from None
    if isinstance(e, Unary):
        return apply_unary(e.op, eval_expr(e.operand, env))
    if isinstance(e, Binary):
        return apply_binary(e.op, eval_expr(e.left, env), eval_expr(e.right, env))
    raise TypeError(f"not an expression: {e!r}")


# --- variable sets ----------------------------------------------------------

def expr_vars(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Unary):
        return expr_vars(e.operand)
    if isinstance(e, Binary):
        return expr_vars(e.left) | expr_vars(e.right)
    return set()


def free_vars(s: Stmt) -> set[str]:
    """Every identifier read or written anywhere in ``s``."""
    if isinstance(s, Assign):
        return {s.name} | expr_vars(s.expr)
    if isinstance(s, (Seq,)):
        return free_vars(s.first) | free_vars(s.rest)
    if isinstance(s, (Demonic, Prob)):
        return free_vars(s.left) | free_vars(s.right)
    if isinstance(s, If):
        return expr_vars(s.cond) | free_vars(s.then) | free_vars(s.orelse)
    if isinstance(s, While):
        return expr_vars(s.cond) | free_vars(s.body)
    return set()


def assigned_vars(s: Stmt) -> set[str]:
    if isinstance(s, Assign):
        return {s.name}
    if isinstance(s, Seq):
        return assigned_vars(s.first) | assigned_vars(s.rest)
    if isinstance(s, (Demonic, Prob)):
        return assigned_vars(s.left) | assigned_vars(s.right)
    if isinstance(s, If):
        return assigned_vars(s.then) | assigned_vars(s.orelse)
    if isinstance(s, While):
        return assigned_vars(s.body)
    return set()


def has_loops(s: Stmt) -> bool:
    if isinstance(s, While):
        return True
    if isinstance(s, Seq):
        return has_loops(s.first) or has_loops(s.rest)
    if isinstance(s, (Demonic, Prob)):
        return has_loops(s.left) or has_loops(s.right)
    if isinstance(s, If):
        return has_loops(s.then) or has_loops(s.orelse)
    return False

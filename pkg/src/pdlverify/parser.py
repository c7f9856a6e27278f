"""Recursive-descent parser for ``.pgcl`` verification tasks.

A task is a list of header directives followed by a braced program::

    @input sw : bool
    @assume sw == true
    @ensures choice == prize
    @prob 2/3
    { prize := 0; ... }

Besides syntax, the parser checks that every variable read by the program or
mentioned in ``@ensures`` is an ``@input`` or definitely assigned beforehand,
and that ``@assume`` only talks about inputs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .errors import (DuplicateHeader, ParseError, ProbOutOfRange, SourceSpan,
                     UndefinedVariable, UnknownDirective)
from .formula import (F_TRUE, And, Atom, Exists, ForallRange, Formula, Implies, Not, Or)
from .pgcl import (SKIP, Assign, Binary, Demonic, Expr, If, Lit, Prob, Stmt, Unary,
                   Var, While, seq)

KEYWORDS = {"skip", "if", "else", "while", "true", "false", "forall", "exists",
            "in", "int", "bool"}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*)
  | (?P<directive>@[A-Za-z_][A-Za-z0-9_]*)
  | (?P<decimal>\d+\.\d+)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>:=|==|!=|<=|>=|&&|\|\||\.\.|->|[<>+\-*/%!(){}\[\];:,])
""", re.VERBOSE)

# operators that may follow a parenthesised sub-expression inside an atom
_EXPR_CONTINUATION = {"==", "!=", "<", "<=", ">", ">=", "+", "-", "*", "/", "%"}


@dataclass(frozen=True)
class Token:
    kind: str  # 'int' | 'decimal' | 'ident' | 'kw' | 'op' | 'directive' | 'eof'
    text: str
    span: SourceSpan


@dataclass(frozen=True)
class InputDecl:
    name: str
    type: str  # 'int' | 'bool'
    lo: int | None = None
    hi: int | None = None

    def domain(self) -> list | None:
        """Finite value domain, or ``None`` for an unbounded integer."""
        if self.type == "bool":
            return [False, True]
        if self.lo is None:
            return None
        return list(range(self.lo, self.hi + 1))

    def __str__(self):
        rng = "" if self.lo is None else f" in [{self.lo}..{self.hi}]"
        return f"{self.name} : {self.type}{rng}"


@dataclass(frozen=True)
class VerificationTask:
    assume: Formula
    ensures: Formula
    prob: Fraction
    inputs: tuple[InputDecl, ...]
    body: Stmt

    def input_names(self) -> list[str]:
        return [d.name for d in self.inputs]

    def domains(self) -> dict[str, list]:
        return {d.name: d.domain() for d in self.inputs if d.domain() is not None}


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        span = SourceSpan(line, pos - line_start + 1, 1)
        if m is None:
            raise ParseError(span, f"unexpected character {text[pos]!r}")
        kind, lexeme = m.lastgroup, m.group()
        span = SourceSpan(line, pos - line_start + 1, len(lexeme))
        if kind == "ident" and lexeme in KEYWORDS:
            kind = "kw"
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, lexeme, span))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            line_start = pos + lexeme.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", _eof_span(text)))
    return tokens


def _eof_span(text: str) -> SourceSpan:
    # point at the last character so the span stays inside the text
    if not text:
        return SourceSpan(1, 1, 0)
    lines = text.split("\n")
    while len(lines) > 1 and lines[-1] == "":
        lines.pop()
    return SourceSpan(len(lines), max(len(lines[-1]), 1), 0)


class _Backtrack(Exception):
    pass


class Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0
        # (name, span) of every variable read, for later definedness checks
        self.reads: list[tuple[str, SourceSpan]] | None = None

    # --- token helpers ------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("op", "kw") and t.text == text

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.pos += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected '{text}'")
        return self.advance()

    def expect_ident(self) -> Token:
        if self.tok.kind != "ident":
            self.error("expected identifier")
        return self.advance()

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ParseError(tok.span, f"{message}, found {found}")

    def expect_eof(self):
        if self.tok.kind != "eof":
            self.error("expected end of input")

    # --- literals -----------------------------------------------------------

    def parse_int_literal(self) -> int:
        neg = False
        if self.at("-"):
            self.advance()
            neg = True
        if self.tok.kind != "int":
            self.error("expected integer")
        v = int(self.advance().text)
        return -v if neg else v

    def parse_rational(self) -> Fraction:
        t = self.tok
        if t.kind == "decimal":
            self.advance()
            value = Fraction(t.text)
        elif t.kind == "int":
            self.advance()
            value = Fraction(int(t.text))
            if self.at("/"):
                self.advance()
                if self.tok.kind != "int":
                    self.error("expected integer denominator")
                den = self.advance()
                if int(den.text) == 0:
                    raise ParseError(den.span, "zero denominator in probability")
                value /= int(den.text)
        else:
            self.error("expected probability literal")
        if not 0 <= value <= 1:
            last = self.tokens[self.pos - 1].span
            length = (last.column + last.length - t.span.column
                      if last.line == t.span.line else t.span.length)
            raise ProbOutOfRange(value, SourceSpan(t.span.line, t.span.column, length))
        return value

    # --- expressions --------------------------------------------------------

    def parse_expr(self, scope: frozenset | None = None) -> Expr:
        return self._or(scope)

    def _binary_level(self, ops: tuple[str, ...], next_level, scope) -> Expr:
        left = next_level(scope)
        while self.tok.kind == "op" and self.tok.text in ops:
            op = self.advance().text
            left = Binary(op, left, next_level(scope))
        return left

    def _or(self, scope):
        return self._binary_level(("||",), self._and, scope)

    def _and(self, scope):
        return self._binary_level(("&&",), self._eq, scope)

    def _eq(self, scope):
        return self._binary_level(("==", "!="), self._rel, scope)

    def _rel(self, scope):
        return self._binary_level(("<", "<=", ">", ">="), self._add, scope)

    def _add(self, scope):
        return self._binary_level(("+", "-"), self._mul, scope)

    def _mul(self, scope):
        return self._binary_level(("*", "/", "%"), self._unary, scope)

    def _unary(self, scope) -> Expr:
        if self.at("-"):
            self.advance()
            if self.tok.kind == "int":
                return Lit(-int(self.advance().text))
            return Unary("-", self._unary(scope))
        if self.at("!"):
            self.advance()
            return Unary("!", self._unary(scope))
        return self._primary(scope)

    def _primary(self, scope) -> Expr:
        t = self.tok
        if t.kind == "int":
            self.advance()
            return Lit(int(t.text))
        if t.kind == "kw" and t.text in ("true", "false"):
            self.advance()
            return Lit(t.text == "true")
        if t.kind == "ident":
            self.advance()
            self._note_read(t, scope)
            return Var(t.text)
        if self.at("("):
            self.advance()
            e = self.parse_expr(scope)
            self.expect(")")
            return e
        self.error("expected expression")

    def _note_read(self, t: Token, scope):
        if self.reads is not None:
            self.reads.append((t.text, t.span))
        elif scope is not None and t.text not in scope:
            raise UndefinedVariable(t.span, t.text)

    # --- formulas -----------------------------------------------------------

    def parse_formula(self, scope: frozenset | None = None) -> Formula:
        left = self._disjunction(scope)
        if self.at("->"):
            self.advance()
            return Implies(left, self.parse_formula(scope))
        return left

    def _disjunction(self, scope):
        left = self._conjunction(scope)
        while self.at("||"):
            self.advance()
            left = Or(left, self._conjunction(scope))
        return left

    def _conjunction(self, scope):
        left = self._formula_unary(scope)
        while self.at("&&"):
            self.advance()
            left = And(left, self._formula_unary(scope))
        return left

    def _formula_unary(self, scope) -> Formula:
        if self.at("!"):
            self.advance()
            return Not(self._formula_unary(scope))
        if self.at("forall") or self.at("exists"):
            return self._quantifier(scope)
        if self.at("("):
            start, reads = self.pos, None if self.reads is None else len(self.reads)
            try:
                self.advance()
                f = self.parse_formula(scope)
                self.expect(")")
                if self.tok.kind == "op" and self.tok.text in _EXPR_CONTINUATION:
                    raise _Backtrack
                return f
            except (ParseError, _Backtrack) as exc:
                self.pos = start
                if reads is not None:
                    del self.reads[reads:]
                try:
                    return Atom(self._eq(scope))
                except ParseError as exc2:
                    if isinstance(exc, ParseError) and _later(exc.span, exc2.span):
                        raise exc from None
                    raise
        return Atom(self._eq(scope))

    def _quantifier(self, scope) -> Formula:
        kind = self.advance().text
        var = self.expect_ident().text
        self.expect("in")
        self.expect("[")
        lo = self.parse_int_literal()
        self.expect("..")
        hi = self.parse_int_literal()
        self.expect("]")
        self.expect(":")
        inner = None if scope is None else scope | {var}
        if self.reads is not None:
            mark = len(self.reads)
            body = self.parse_formula(inner)
            self.reads[mark:] = [r for r in self.reads[mark:] if r[0] != var]
        else:
            body = self.parse_formula(inner)
        if kind == "forall":
            return ForallRange(var, lo, hi, body)
        return Exists(var, lo, hi, body)

    # --- statements ---------------------------------------------------------

    def parse_block(self, defined: frozenset | None) -> tuple[Stmt, frozenset | None]:
        self.expect("{")
        s, defined = self.parse_stmtseq(defined)
        self.expect("}")
        return s, defined

    def parse_stmtseq(self, defined):
        stmts = []
        while True:
            s, defined = self.parse_stmt(defined)
            stmts.append(s)
            if self.at("}") or self.tok.kind == "eof":
                break
        return seq(*stmts), defined

    def parse_stmt(self, defined) -> tuple[Stmt, frozenset | None]:
        t = self.tok
        if self.at("skip"):
            self.advance()
            self.expect(";")
            return SKIP, defined
        if t.kind == "ident":
            self.advance()
            self.expect(":=")
            e = self.parse_expr(defined)
            self.expect(";")
            return Assign(t.text, e), None if defined is None else defined | {t.text}
        if self.at("if"):
            self.advance()
            self.expect("(")
            cond = self.parse_expr(defined)
            self.expect(")")
            then, d1 = self.parse_block(defined)
            self.expect("else")
            orelse, d2 = self.parse_block(defined)
            return If(cond, then, orelse), _meet(d1, d2)
        if self.at("while"):
            self.advance()
            self.expect("(")
            cond = self.parse_expr(defined)
            self.expect(")")
            body, _ = self.parse_block(defined)
            return While(cond, body), defined
        if self.at("{"):
            left, d1 = self.parse_block(defined)
            if self.at("["):
                self.advance()
                if self.at("]"):
                    self.advance()
                    right, d2 = self.parse_block(defined)
                    return Demonic(left, right), _meet(d1, d2)
                p = self.parse_rational()
                self.expect("]")
                right, d2 = self.parse_block(defined)
                return Prob(p, left, right), _meet(d1, d2)
            self.error("expected '[]' or '[p]' after braced statement")
        self.error("expected statement")

    # --- tasks --------------------------------------------------------------

    def parse_task(self) -> VerificationTask:
        headers: dict[str, object] = {}
        inputs: list[InputDecl] = []
        header_reads: dict[str, list[tuple[str, SourceSpan]]] = {}
        while self.tok.kind == "directive":
            d = self.advance()
            name = d.text[1:]
            if name in ("assume", "ensures"):
                if name in headers:
                    raise DuplicateHeader(d.span, "@" + name)
                self.reads = []
                headers[name] = self.parse_formula()
                header_reads[name], self.reads = self.reads, None
            elif name == "prob":
                if name in headers:
                    raise DuplicateHeader(d.span, "@prob")
                headers[name] = self.parse_rational()
            elif name == "input":
                var = self.expect_ident()
                if any(i.name == var.text for i in inputs):
                    raise DuplicateHeader(var.span, f"@input {var.text}")
                self.expect(":")
                if not (self.at("int") or self.at("bool")):
                    self.error("expected 'int' or 'bool'")
                ty = self.advance().text
                lo = hi = None
                if ty == "int" and self.at("in"):
                    self.advance()
                    self.expect("[")
                    lo = self.parse_int_literal()
                    self.expect("..")
                    hi = self.parse_int_literal()
                    close = self.expect("]")
                    if lo > hi:
                        raise ParseError(close.span, f"empty input range [{lo}..{hi}]")
                inputs.append(InputDecl(var.text, ty, lo, hi))
            else:
                raise UnknownDirective(d.span, name)
        brace = self.tok
        for required in ("ensures", "prob"):
            if required not in headers:
                raise ParseError(brace.span, f"missing @{required} header")
        input_names = frozenset(i.name for i in inputs)
        body, defined = self.parse_block(input_names)
        self.expect_eof()
        for name, span in header_reads.get("assume", []):
            if name not in input_names:
                raise UndefinedVariable(span, name)
        for name, span in header_reads["ensures"]:
            if name not in defined:
                raise UndefinedVariable(span, name)
        return VerificationTask(
            assume=headers.get("assume", F_TRUE),
            ensures=headers["ensures"],
            prob=headers["prob"],
            inputs=tuple(inputs),
            body=body,
        )


def _meet(a, b):
    if a is None or b is None:
        return None
    return a & b


def _later(a: SourceSpan, b: SourceSpan) -> bool:
    return (a.line, a.column) > (b.line, b.column)


def parse_task(text: str) -> VerificationTask:
    return Parser(text).parse_task()


def parse_formula(text: str) -> Formula:
    p = Parser(text)
    f = p.parse_formula()
    p.expect_eof()
    return f


def parse_expr(text: str) -> Expr:
    p = Parser(text)
    e = p.parse_expr()
    p.expect_eof()
    return e


def parse_program(text: str, inputs: Iterable[str] | None = None) -> Stmt:
    """Parse a bare statement sequence (no braces, no headers).

    With ``inputs`` given, reads of other unassigned variables are rejected.
    """
    p = Parser(text)
    s, _ = p.parse_stmtseq(None if inputs is None else frozenset(inputs))
    p.expect_eof()
    return s

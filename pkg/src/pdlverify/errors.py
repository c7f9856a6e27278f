"""Exception hierarchy shared by every stage of the verifier."""

from __future__ import annotations

from dataclasses import dataclass


class PdlError(Exception):
    """Base class for all errors raised by this package."""


# --- evaluation -------------------------------------------------------------

class EvalError(PdlError):
    pass


class UnboundVariable(EvalError):
    def __init__(self, name: str):
        super().__init__(f"unbound variable '{name}'")
        self.name = name


class TypeMismatch(EvalError):
    def __init__(self, op: str, got: str):
        super().__init__(f"operator '{op}' cannot be applied to {got}")
        self.op = op
        self.got = got


class DivisionByZero(EvalError):
    def __init__(self, op: str = "/"):
        super().__init__(f"division by zero in '{op}'")
        self.op = op


# --- parsing ----------------------------------------------------------------

@dataclass(frozen=True)
class SourceSpan:
    """1-based line/column position of a token plus its length."""

    line: int
    column: int
    length: int = 0

    def __post_init__(self):
        if self.line < 1 or self.column < 1 or self.length < 0:
            raise ValueError(f"invalid span {self}")

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


class ParseError(PdlError):
    """Malformed input text; always carries the offending span."""

    def __init__(self, span: SourceSpan, message: str):
        super().__init__(f"{span}: {message}")
        self.span = span
        self.message = message


class DuplicateHeader(ParseError):
    def __init__(self, span: SourceSpan, key: str):
        super().__init__(span, f"duplicate header '{key}'")
        self.key = key


class UnknownDirective(ParseError):
    def __init__(self, span: SourceSpan, name: str):
        super().__init__(span, f"unknown directive '@{name}'")
        self.name = name


class UndefinedVariable(ParseError):
    def __init__(self, span: SourceSpan, name: str):
        super().__init__(
            span, f"variable '{name}' is neither an @input nor assigned before use")
        self.name = name


class ProbOutOfRange(ParseError):
    """A probability literal or bound outside [0, 1].

    Raised by the parser (with a real span) and by the oracle's step
    function, where there is no source position.
    """

    def __init__(self, value, span: SourceSpan | None = None):
        self.value = value
        msg = f"probability {value} is outside [0, 1]"
        if span is None:
            PdlError.__init__(self, msg)
            self.span = None
            self.message = msg
        else:
            super().__init__(span, msg)


# --- proof search and solving -------------------------------------------------

class Undecided(PdlError):
    """The built-in validity checker has no strategy for the query."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class InexactBudget(PdlError):
    """A truncated oracle run cannot decide a p-box formula."""


class UnsupportedConstruct(PdlError):
    pass


class CyclicConstraints(PdlError):
    pass


class MalformedConstraint(PdlError):
    pass


class MissingVariable(PdlError):
    def __init__(self, var):
        super().__init__(f"no value for probability variable {var}")
        self.var = var


class BindingError(PdlError):
    """A ``--bind`` flag names an unknown input or has an ill-typed value."""

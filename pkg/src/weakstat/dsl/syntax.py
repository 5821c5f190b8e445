"""Syntax tree and diagnostic types of the scenario language."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union


@dataclass(frozen=True)
class Span:
    line: int
    column: int
    end_line: int
    end_column: int

    def to(self, other: "Span") -> "Span":
        return Span(self.line, self.column, other.end_line, other.end_column)


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" or "warning"
    message: str
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


class DslError(Exception):
    """Raised with one or more error diagnostics (plus any warnings)."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == "error"]


@dataclass(frozen=True)
class Token:
    kind: str  # NAME NUMBER IMAG OP NEWLINE EOF
    text: str
    span: Span


# Expression nodes. Spans never take part in equality, so a re-parsed
# pretty-printed document compares equal to the original.


@dataclass(frozen=True)
class Num:
    value: float
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Imag:
    value: float
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Const:
    name: str  # "i" or "pi"
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Sqrt:
    arg: "Expr"
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Ket:
    entries: tuple["Expr", ...]
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Outer:
    left: "Expr"
    right: "Expr"
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Identity:
    dim: int
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Pauli:
    axis: str  # "X", "Y" or "Z"
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class GellMann:
    dim: int
    index: int  # 1-based
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Ref:
    name: str
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class BinOp:
    op: str  # "+", "-", "*", "/", "kron"
    left: "Expr"
    right: "Expr"
    span: Span | None = field(default=None, compare=False, repr=False)


Expr = Union[Num, Imag, Const, Sqrt, Ket, Outer, Identity, Pauli, GellMann, Ref, Neg, BinOp]


# Declaration payloads.


@dataclass(frozen=True)
class Dim:
    a: int
    b: int | None = None


@dataclass(frozen=True)
class MaxEnt:
    dim: int


@dataclass(frozen=True)
class NameList:
    names: tuple[str, ...]
    spans: tuple[Span, ...] = field(default=(), compare=False, repr=False)


@dataclass(frozen=True)
class QueryExpr:
    kind: str  # "joint" or "cond"
    final: str
    effect: str
    final_span: Span | None = field(default=None, compare=False, repr=False)
    effect_span: Span | None = field(default=None, compare=False, repr=False)


Payload = Union[Dim, MaxEnt, NameList, QueryExpr, Expr]

DECL_KINDS = ("dim", "state", "op", "pvm", "probe", "query")


@dataclass(frozen=True)
class Decl:
    kind: str
    name: str
    payload: Payload
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ScenarioDoc:
    declarations: tuple[Decl, ...]

    @property
    def source_spans(self) -> dict[tuple[str, str], Span]:
        return {(d.kind, d.name): d.span for d in self.declarations}

    def __len__(self) -> int:
        return len(self.declarations)

"""Render a :class:`ScenarioDoc` back to source text.

Nested binary operations are always parenthesized, so the output re-parses
to a structurally equal document.
"""

from __future__ import annotations

from .syntax import (
    BinOp,
    Const,
    Decl,
    Dim,
    GellMann,
    Identity,
    Imag,
    Ket,
    MaxEnt,
    NameList,
    Neg,
    Num,
    Outer,
    Pauli,
    QueryExpr,
    Ref,
    ScenarioDoc,
    Sqrt,
)

_SYMBOL = {"+": "+", "-": "-", "*": "*", "/": "/", "kron": "⊗"}


def _wrap(node) -> str:
    s = expr_to_source(node)
    return f"({s})" if isinstance(node, (BinOp, Neg)) else s


def expr_to_source(node) -> str:
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Imag):
        return f"{float(node.value)!r}i"
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Sqrt):
        return f"sqrt({expr_to_source(node.arg)})"
    if isinstance(node, Ket):
        return "ket[" + ", ".join(expr_to_source(e) for e in node.entries) + "]"
    if isinstance(node, Outer):
        return f"outer({expr_to_source(node.left)}, {expr_to_source(node.right)})"
    if isinstance(node, Identity):
        return f"I{node.dim}"
    if isinstance(node, Pauli):
        return node.axis
    if isinstance(node, GellMann):
        return f"gellmann({node.dim}, {node.index})"
    if isinstance(node, Ref):
        return node.name
    if isinstance(node, Neg):
        return "-" + _wrap(node.operand)
    if isinstance(node, BinOp):
        return f"{_wrap(node.left)} {_SYMBOL[node.op]} {_wrap(node.right)}"
    raise TypeError(f"not an expression node: {node!r}")


def decl_to_source(decl: Decl) -> str:
    p = decl.payload
    if decl.kind == "dim":
        assert isinstance(p, Dim)
        return f"dim {p.a}" if p.b is None else f"dim {p.a}x{p.b}"
    if isinstance(p, MaxEnt):
        return f"state {decl.name} = maxent {p.dim}"
    if isinstance(p, NameList):
        return f"pvm {decl.name} = {{{', '.join(p.names)}}}"
    if isinstance(p, QueryExpr):
        return f"query {decl.name} = {p.kind}({p.final}, {p.effect})"
    return f"{decl.kind} {decl.name} = {expr_to_source(p)}"


def to_source(doc: ScenarioDoc) -> str:
    return "".join(decl_to_source(d) + "\n" for d in doc.declarations)

"""Lexer and recursive-descent parser for ``.ws`` scenario files.

Grammar, one declaration per line (newlines inside brackets are ignored,
``#`` starts a comment)::

    dim 2 | dim 2x2
    state NAME = maxent INT | state NAME = expr
    op NAME = expr
    pvm NAME = { NAME, ... }
    probe NAME = expr
    query NAME = joint(NAME, NAME) | cond(NAME, NAME)

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/" | "⊗" | "kron") unary)*
    unary   := "-" unary | "+" unary | primary
    primary := NUMBER | NUMBER"i" | "i" | "pi" | "sqrt(" expr ")"
             | "ket[" expr ("," expr)* "]" | "outer(" expr "," expr ")"
             | "I" INT | "X" | "Y" | "Z" | "gellmann(" INT "," INT ")"
             | NAME | "(" expr ")"

Syntax errors never raise anything but :class:`DslError`; the parser
recovers at the next line so one pass reports every bad declaration.
"""

from __future__ import annotations

import re

from .syntax import (
    DECL_KINDS,
    BinOp,
    Const,
    Decl,
    Diagnostic,
    Dim,
    DslError,
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
    Span,
    Sqrt,
    Token,
)

RESERVED = frozenset(
    DECL_KINDS
    + ("maxent", "ket", "outer", "joint", "cond", "kron", "sqrt", "pi", "i", "I", "X", "Y", "Z", "gellmann")
)

_NUMBER = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_IDENTITY = re.compile(r"I(\d+)$")
_DECL_START = re.compile(r"[ \t]*(?:dim|state|op|pvm|probe|query)\b")
_OPS = "=,[](){}+-*/⊗"
_OPEN, _CLOSE = "([{", ")]}"
_BINARY_SYMBOL = {"+": "+", "-": "-", "*": "*", "/": "/", "⊗": "kron", "kron": "kron"}


def end_position(text: str) -> tuple[int, int]:
    """Line and column just past the last character, kept inside the text."""
    lines = text.split("\n")
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        return 1, 1
    return len(lines), len(lines[-1]) + 1


def tokenize(text: str) -> tuple[list[Token], list[Diagnostic]]:
    tokens: list[Token] = []
    diags: list[Diagnostic] = []
    line, col, pos, depth = 1, 1, 0, 0
    n = len(text)

    def emit(kind: str, s: str, l0: int, c0: int) -> None:
        tokens.append(Token(kind, s, Span(l0, c0, l0, c0 + len(s))))

    while pos < n:
        ch = text[pos]
        if ch == "\n":
            # a line opening with a declaration keyword closes any open bracket
            if depth and _DECL_START.match(text, pos + 1):
                depth = 0
            if depth == 0:
                emit("NEWLINE", "\n", line, col)
            line, col, pos = line + 1, 1, pos + 1
            continue
        if ch in " \t\r\f\v\ufeff":
            pos, col = pos + 1, col + 1
            continue
        if ch == "#":
            while pos < n and text[pos] != "\n":
                pos, col = pos + 1, col + 1
            continue
        m = _NUMBER.match(text, pos)
        if m:
            s = m.group()
            after = m.end()
            if after < n and text[after] == "i" and not (
                after + 1 < n and (text[after + 1].isalnum() or text[after + 1] == "_")
            ):
                emit("IMAG", s + "i", line, col)
                s += "i"
            else:
                emit("NUMBER", s, line, col)
            pos += len(s)
            col += len(s)
            continue
        m = _NAME.match(text, pos)
        if m:
            s = m.group()
            emit("NAME", s, line, col)
            pos += len(s)
            col += len(s)
            continue
        if ch in _OPS:
            if ch in _OPEN:
                depth += 1
            elif ch in _CLOSE:
                depth = max(0, depth - 1)
            emit("OP", ch, line, col)
            pos, col = pos + 1, col + 1
            continue
        diags.append(Diagnostic("error", f"unexpected character {ch!r}", line, col))
        pos, col = pos + 1, col + 1
    el, ec = end_position(text)
    tokens.append(Token("EOF", "", Span(el, ec, el, ec)))
    return tokens, diags


class _Fail(Exception):
    def __init__(self, message: str, token: Token):
        self.message = message
        self.token = token


def _describe(tok: Token) -> str:
    if tok.kind == "EOF":
        return "end of input"
    if tok.kind == "NEWLINE":
        return "end of line"
    return repr(tok.text)


class Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens, self.diagnostics = tokenize(text)
        self.pos = 0

    # token helpers

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind != "EOF":
            self.pos += 1
        return t

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    def at_op(self, text: str) -> bool:
        return self.at("OP", text)

    def expect_op(self, text: str, context: str) -> Token:
        if not self.at_op(text):
            raise _Fail(f"expected '{text}' {context}, found {_describe(self.tok)}", self.tok)
        return self.advance()

    def expect_int(self, context: str) -> tuple[int, Token]:
        t = self.tok
        if t.kind != "NUMBER" or not t.text.isdigit():
            raise _Fail(f"expected an integer {context}, found {_describe(t)}", t)
        self.advance()
        return int(t.text), t

    def expect_name(self, context: str) -> Token:
        t = self.tok
        if t.kind != "NAME":
            raise _Fail(f"expected a name {context}, found {_describe(t)}", t)
        if t.text in RESERVED or _IDENTITY.match(t.text):
            raise _Fail(f"'{t.text}' is a reserved word and cannot be used as a name", t)
        return self.advance()

    def at_line_end(self) -> bool:
        return self.tok.kind in ("NEWLINE", "EOF")

    # document

    def parse(self) -> ScenarioDoc:
        decls = []
        while True:
            while self.at("NEWLINE"):
                self.advance()
            if self.at("EOF"):
                break
            start = self.pos
            try:
                decl = self.declaration()
                if not self.at_line_end():
                    raise _Fail(f"unexpected {_describe(self.tok)} after declaration", self.tok)
                decls.append(decl)
            except _Fail as f:
                s = f.token.span
                self.diagnostics.append(Diagnostic("error", f.message, s.line, s.column))
                if self.pos == start:
                    self.advance()
                while not self.at_line_end():
                    self.advance()
        if not decls and not any(d.severity == "error" for d in self.diagnostics):
            self.diagnostics.append(Diagnostic("error", "expected at least one declaration", 1, 1))
        if any(d.severity == "error" for d in self.diagnostics):
            raise DslError(sorted(self.diagnostics, key=lambda d: (d.line, d.column)))
        return ScenarioDoc(tuple(decls))

    def declaration(self) -> Decl:
        head = self.tok
        if head.kind != "NAME" or head.text not in DECL_KINDS:
            raise _Fail(
                "expected a declaration (dim, state, op, pvm, probe or query), "
                f"found {_describe(head)}",
                head,
            )
        self.advance()
        kind = head.text
        if kind == "dim":
            payload = self.dim_payload()
            return Decl("dim", "dim", payload, head.span.to(self.tokens[self.pos - 1].span))
        name = self.expect_name(f"after '{kind}'")
        self.expect_op("=", f"after the {kind} name")
        if kind == "state" and self.at("NAME", "maxent"):
            self.advance()
            d, _ = self.expect_int("after 'maxent'")
            payload = MaxEnt(d)
        elif kind == "pvm":
            payload = self.name_list()
        elif kind == "query":
            payload = self.query_payload()
        else:
            payload = self.expr()
        return Decl(kind, name.text, payload, head.span.to(self.tokens[self.pos - 1].span))

    def dim_payload(self) -> Dim:
        a, _ = self.expect_int("after 'dim'")
        t = self.tok
        if t.kind == "NAME" and t.text == "x":
            self.advance()
            b, _ = self.expect_int("after 'x'")
            return Dim(a, b)
        if t.kind == "NAME" and re.fullmatch(r"x\d+", t.text):
            self.advance()
            return Dim(a, int(t.text[1:]))
        return Dim(a, None)

    def name_list(self) -> NameList:
        self.expect_op("{", "to open the projector list")
        names, spans = [], []
        while True:
            t = self.expect_name("in the projector list")
            names.append(t.text)
            spans.append(t.span)
            if self.at_op(","):
                self.advance()
                continue
            self.expect_op("}", "to close the projector list")
            return NameList(tuple(names), tuple(spans))

    def query_payload(self) -> QueryExpr:
        t = self.tok
        if not (t.kind == "NAME" and t.text in ("joint", "cond")):
            raise _Fail(f"expected 'joint' or 'cond', found {_describe(t)}", t)
        self.advance()
        self.expect_op("(", f"after '{t.text}'")
        f = self.expect_name("for the final outcome")
        self.expect_op(",", "between the outcome and the effect")
        g = self.expect_name("for the effect")
        self.expect_op(")", f"to close '{t.text}('")
        return QueryExpr(t.text, f.text, g.text, f.span, g.span)

    # expressions

    def _binary(self, operand, ops: tuple[str, ...]):
        left = operand()
        while True:
            t = self.tok
            sym = None
            if t.kind == "OP" and t.text in ops:
                sym = t.text
            elif t.kind == "NAME" and t.text == "kron" and "kron" in ops:
                sym = "kron"
            if sym is None:
                return left
            self.advance()
            nxt = self.tok
            if nxt.kind in ("NEWLINE", "EOF") or (nxt.kind == "OP" and nxt.text in ",)]}="):
                raise _Fail(f"expected an operand after '{t.text}'", t)
            right = operand()
            left = BinOp(_BINARY_SYMBOL[sym], left, right, left.span.to(right.span))

    def expr(self):
        return self._binary(self.term, ("+", "-"))

    def term(self):
        return self._binary(self.unary, ("*", "/", "⊗", "kron"))

    def unary(self):
        t = self.tok
        if t.kind == "OP" and t.text in "+-":
            self.advance()
            if self.at_line_end():
                raise _Fail(f"expected an operand after '{t.text}'", t)
            operand = self.unary()
            if t.text == "+":
                return operand
            return Neg(operand, t.span.to(operand.span))
        return self.primary()

    def primary(self):
        t = self.tok
        if t.kind == "NUMBER":
            self.advance()
            return Num(float(t.text), t.span)
        if t.kind == "IMAG":
            self.advance()
            return Imag(float(t.text[:-1]), t.span)
        if t.kind == "OP" and t.text == "(":
            self.advance()
            inner = self.expr()
            self.expect_op(")", "to close '('")
            return inner
        if t.kind != "NAME":
            raise _Fail(f"expected an expression, found {_describe(t)}", t)
        word = t.text
        if word in ("i", "pi"):
            self.advance()
            return Const(word, t.span)
        if word in ("X", "Y", "Z"):
            self.advance()
            return Pauli(word, t.span)
        m = _IDENTITY.match(word)
        if m:
            self.advance()
            return Identity(int(m.group(1)), t.span)
        if word == "I":
            self.advance()
            d, dt = self.expect_int("after 'I' (identity dimension)")
            return Identity(d, t.span.to(dt.span))
        if word == "sqrt":
            self.advance()
            self.expect_op("(", "after 'sqrt'")
            arg = self.expr()
            close = self.expect_op(")", "to close 'sqrt('")
            return Sqrt(arg, t.span.to(close.span))
        if word == "ket":
            self.advance()
            self.expect_op("[", "after 'ket'")
            entries = [self.expr()]
            while self.at_op(","):
                self.advance()
                entries.append(self.expr())
            close = self.expect_op("]", "to close 'ket['")
            return Ket(tuple(entries), t.span.to(close.span))
        if word == "outer":
            self.advance()
            self.expect_op("(", "after 'outer'")
            left = self.expr()
            self.expect_op(",", "between the two kets of 'outer'")
            right = self.expr()
            close = self.expect_op(")", "to close 'outer('")
            return Outer(left, right, t.span.to(close.span))
        if word == "gellmann":
            self.advance()
            self.expect_op("(", "after 'gellmann'")
            d, _ = self.expect_int("for the Gell-Mann dimension")
            self.expect_op(",", "in 'gellmann(d, k)'")
            k, _ = self.expect_int("for the Gell-Mann index")
            close = self.expect_op(")", "to close 'gellmann('")
            return GellMann(d, k, t.span.to(close.span))
        if word in RESERVED:
            raise _Fail(f"'{word}' cannot start an expression", t)
        self.advance()
        return Ref(word, t.span)


def parse(text: str) -> ScenarioDoc:
    """Parse scenario source text; raises :class:`DslError` with diagnostics."""
    try:
        return Parser(text).parse()
    except RecursionError:
        raise DslError([Diagnostic("error", "expression nested too deeply", 1, 1)]) from None

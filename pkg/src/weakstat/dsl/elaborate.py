"""Turn a parsed :class:`ScenarioDoc` into a validated :class:`Scenario`."""

from __future__ import annotations

import cmath
import math

import numpy as np

from .. import operators as ops
from ..errors import WeakstatError
from ..scenarios import Query, Scenario
from .syntax import (
    BinOp,
    Const,
    Decl,
    Diagnostic,
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
)

MAX_DIM = 64
TOL = 1e-10
_PAULI = {"X": ops.PAULI_X, "Y": ops.PAULI_Y, "Z": ops.PAULI_Z}
_START = Span(1, 1, 1, 1)


class _Bad(Exception):
    def __init__(self, message: str, span: Span | None):
        self.message = message
        self.span = span or _START


def _kind(v) -> str:
    if isinstance(v, complex):
        return "scalar"
    return "ket" if v.ndim == 1 else "operator"


def _shape(v) -> str:
    if isinstance(v, complex):
        return "scalar"
    return f"ket of dimension {v.size}" if v.ndim == 1 else f"{v.shape[0]}x{v.shape[1]} operator"


def gell_mann_element(d: int, k: int) -> np.ndarray:
    """The k-th (1-based) generalized Gell-Mann matrix, same order as ``ops.gell_mann``."""
    if d == 2:
        return np.array(_PAULI["XYZ"[k - 1]])
    pairs = [(j, l) for j in range(d) for l in range(j + 1, d)]
    m = np.zeros((d, d), dtype=complex)
    idx = k - 1
    if idx < len(pairs):
        j, l = pairs[idx]
        m[j, l] = m[l, j] = 1.0
        return m
    idx -= len(pairs)
    if idx < len(pairs):
        j, l = pairs[idx]
        m[j, l], m[l, j] = -1j, 1j
        return m
    lvl = idx - len(pairs) + 1
    diag = np.zeros(d)
    diag[:lvl] = 1.0
    diag[lvl] = -lvl
    return np.diag(diag * math.sqrt(2.0 / (lvl * (lvl + 1)))).astype(complex)


class _Elaborator:
    def __init__(self, doc: ScenarioDoc):
        self.doc = doc
        self.diags: list[Diagnostic] = []
        self.values: dict[str, tuple[str, object, Decl]] = {}

    def error(self, message: str, span: Span | None) -> None:
        s = span or _START
        self.diags.append(Diagnostic("error", message, s.line, s.column))

    def warn(self, message: str, span: Span | None) -> None:
        s = span or _START
        self.diags.append(Diagnostic("warning", message, s.line, s.column))

    # expressions

    def ev(self, node):
        if isinstance(node, Num):
            return complex(node.value)
        if isinstance(node, Imag):
            return complex(0.0, node.value)
        if isinstance(node, Const):
            return 1j if node.name == "i" else complex(math.pi)
        if isinstance(node, Sqrt):
            arg = self.ev(node.arg)
            if not isinstance(arg, complex):
                raise _Bad(f"sqrt needs a scalar argument, got a {_shape(arg)}", node.span)
            return complex(cmath.sqrt(arg))
        if isinstance(node, Ket):
            entries = [self.ev(e) for e in node.entries]
            for e, n in zip(entries, node.entries):
                if not isinstance(e, complex):
                    raise _Bad(f"ket entries must be scalars, got a {_shape(e)}", n.span)
            if len(entries) > MAX_DIM:
                raise _Bad(f"ket dimension {len(entries)} exceeds {MAX_DIM}", node.span)
            return self.normalized(np.array(entries, dtype=complex), node.span, "ket")
        if isinstance(node, Outer):
            u, v = self.ev(node.left), self.ev(node.right)
            if _kind(u) != "ket" or _kind(v) != "ket" or u.size != v.size:
                raise _Bad(
                    f"outer needs two kets of equal dimension, got {_shape(u)} and {_shape(v)}",
                    node.span,
                )
            return ops.outer(u, v)
        if isinstance(node, Identity):
            if not 1 <= node.dim <= MAX_DIM:
                raise _Bad(f"identity dimension must be between 1 and {MAX_DIM}", node.span)
            return np.eye(node.dim, dtype=complex)
        if isinstance(node, Pauli):
            return np.array(_PAULI[node.axis])
        if isinstance(node, GellMann):
            if not 2 <= node.dim <= MAX_DIM or not 1 <= node.index <= node.dim**2 - 1:
                raise _Bad(
                    f"gellmann({node.dim}, {node.index}) does not exist; need 2 <= d <= {MAX_DIM} "
                    "and 1 <= k <= d*d - 1",
                    node.span,
                )
            return gell_mann_element(node.dim, node.index)
        if isinstance(node, Ref):
            if node.name not in self.values:
                raise _Bad(f"undefined name '{node.name}'", node.span)
            kind, value, _ = self.values[node.name]
            if value is None:
                raise _Bad(f"'{node.name}' could not be evaluated", node.span)
            return value
        if isinstance(node, Neg):
            return -self.ev(node.operand)
        if isinstance(node, BinOp):
            return self.binop(node)
        raise _Bad("unsupported expression", getattr(node, "span", None))

    def binop(self, node: BinOp):
        a, b = self.ev(node.left), self.ev(node.right)
        ka, kb = _kind(a), _kind(b)
        op = node.op
        mismatch = _Bad(f"cannot apply '{op}' to a {_shape(a)} and a {_shape(b)}", node.span)
        if op in "+-":
            sign = 1 if op == "+" else -1
            if ka == kb == "scalar":
                return a + sign * b
            if ka == "scalar" and kb == "operator" and b.shape[0] == b.shape[1]:
                return a * np.eye(b.shape[0]) + sign * b
            if kb == "scalar" and ka == "operator" and a.shape[0] == a.shape[1]:
                return a + sign * b * np.eye(a.shape[0])
            if ka == kb and ka != "scalar" and a.shape == b.shape:
                return a + sign * b
            raise mismatch
        if op == "*":
            if ka == "scalar" or kb == "scalar":
                return a * b
            if ka == "operator" and a.shape[1] == (b.shape[0]):
                return a @ b
            raise mismatch
        if op == "/":
            if kb != "scalar":
                raise mismatch
            if b == 0:
                raise _Bad("division by zero", node.span)
            return a / b
        if op == "kron":
            if ka == "scalar" or kb == "scalar":
                return a * b
            if ka != kb:
                raise mismatch
            size = (a.shape[0] * b.shape[0]) if ka == "ket" else max(a.shape[0] * b.shape[0], a.shape[1] * b.shape[1])
            if size > MAX_DIM:
                raise _Bad(f"tensor product dimension {size} exceeds {MAX_DIM}", node.span)
            return np.kron(a, b)
        raise mismatch

    def normalized(self, v: np.ndarray, span: Span | None, what: str) -> np.ndarray:
        norm = float(np.linalg.norm(v))
        if not math.isfinite(norm) or norm == 0.0:
            raise _Bad(f"{what} has zero or non-finite norm", span)
        if abs(norm - 1.0) > TOL:
            self.warn(f"{what} normalized (norm was {norm:.6g})", span)
            return v / norm
        return v

    # declarations

    def run(self, name: str) -> Scenario:
        decls = self.doc.declarations
        dims = [d for d in decls if d.kind == "dim"]
        if not dims:
            self.error("missing 'dim' declaration", decls[0].span if decls else None)
            raise DslError(self.diags)
        for extra in dims[1:]:
            self.error("duplicate 'dim' declaration", extra.span)
        dim_a = dims[0].payload.a
        dim_b = dims[0].payload.b or 1
        total = dim_a * dim_b
        if dim_a < 1 or dim_b < 1 or total > MAX_DIM:
            self.error(f"dimension must be between 1 and {MAX_DIM}", dims[0].span)
            raise DslError(self.diags)

        names: dict[tuple[str, str], Decl] = {}
        states: list[tuple[str, np.ndarray, Decl]] = []
        pvms: dict[str, dict[str, np.ndarray]] = {}
        outcome_owner: dict[str, str] = {}
        probes: dict[str, np.ndarray] = {}
        queries: list[Query] = []

        for decl in decls:
            if decl.kind == "dim":
                continue
            space = "value" if decl.kind in ("state", "op", "probe") else decl.kind
            prior = names.get((space, decl.name))
            if prior is not None:
                s = prior.span or _START
                self.error(
                    f"'{decl.name}' is already declared as {prior.kind} at {s.line}:{s.column}",
                    decl.span,
                )
                continue
            names[(space, decl.name)] = decl
            try:
                self.declare(decl, total, states, pvms, outcome_owner, probes, queries)
            except _Bad as bad:
                self.diags.append(Diagnostic("error", bad.message, bad.span.line, bad.span.column))
                if decl.kind in ("state", "op", "probe"):
                    self.values[decl.name] = (decl.kind, None, decl)
            except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
                self.error(f"cannot evaluate {decl.kind} '{decl.name}': {exc}", decl.span)
                if decl.kind in ("state", "op", "probe"):
                    self.values[decl.name] = (decl.kind, None, decl)

        if not any(d.kind == "state" for d in decls):
            self.error("no 'state' declaration; the first state is the initial state", decls[0].span)
        if not any(d.kind == "pvm" for d in decls):
            self.error("no 'pvm' declaration; at least one final measurement is required", decls[0].span)
        if any(d.severity == "error" for d in self.diags):
            raise DslError(self.diags)
        ket = states[0][1]
        warnings = tuple(str(d) for d in self.diags if d.severity == "warning")
        try:
            return Scenario(
                name=name,
                dim_a=dim_a,
                dim_b=dim_b,
                initial=ops.projector(ket),
                measurements=pvms,
                probes=probes,
                queries=tuple(queries),
                meta={"states": {n: v for n, v, _ in states}},
                warnings=warnings,
            )
        except (WeakstatError, ValueError, KeyError) as exc:
            self.error(f"invalid scenario: {exc}", decls[0].span)
            raise DslError(self.diags) from None

    def declare(self, decl, total, states, pvms, outcome_owner, probes, queries) -> None:
        p = decl.payload
        if decl.kind == "state":
            if isinstance(p, MaxEnt):
                if p.dim * p.dim != total:
                    raise _Bad(f"maxent {p.dim} has dimension {p.dim * p.dim}, scenario has {total}", decl.span)
                v = ops.maximally_entangled(p.dim)
            else:
                v = self.ev(p)
                if _kind(v) != "ket":
                    raise _Bad(f"state '{decl.name}' must be a ket, got a {_shape(v)}", decl.span)
                if v.size != total:
                    raise _Bad(f"state '{decl.name}' has dimension {v.size}, scenario has {total}", decl.span)
                v = self.normalized(v, decl.span, f"state '{decl.name}'")
            if not np.all(np.isfinite(v)):
                raise _Bad(f"state '{decl.name}' has non-finite amplitudes", decl.span)
            self.values[decl.name] = ("state", v, decl)
            states.append((decl.name, v, decl))
        elif decl.kind in ("op", "probe"):
            v = self.ev(p)
            if isinstance(v, complex) and decl.kind == "op":
                v = v * np.eye(total)
            if _kind(v) != "operator":
                raise _Bad(f"{decl.kind} '{decl.name}' must be an operator, got a {_shape(v)}", decl.span)
            if not np.all(np.isfinite(v)):
                raise _Bad(f"{decl.kind} '{decl.name}' has non-finite entries", decl.span)
            self.values[decl.name] = (decl.kind, v, decl)
            if decl.kind == "probe":
                if v.shape != (total, total):
                    raise _Bad(f"probe '{decl.name}' is a {_shape(v)}; scenario dimension is {total}", decl.span)
                if ops.hermiticity_residue(v) > TOL * (1 + np.max(np.abs(v))):
                    raise _Bad(f"probe '{decl.name}' is not Hermitian", decl.span)
                probes[decl.name] = v
        elif decl.kind == "pvm":
            assert isinstance(p, NameList)
            outcomes: dict[str, np.ndarray] = {}
            for n, s in zip(p.names, p.spans or [decl.span] * len(p.names)):
                entry = self.values.get(n)
                if entry is None or entry[0] != "op":
                    raise _Bad(f"'{n}' is not a declared op", s)
                m = entry[1]
                if m is None:
                    raise _Bad(f"'{n}' could not be evaluated", s)
                if m.shape != (total, total):
                    raise _Bad(f"'{n}' is a {_shape(m)}; scenario dimension is {total}", s)
                if n in outcomes or n in outcome_owner:
                    raise _Bad(f"'{n}' already appears in pvm '{outcome_owner.get(n, decl.name)}'", s)
                if float(np.max(np.abs(m @ m - m))) > TOL or ops.hermiticity_residue(m) > TOL:
                    raise _Bad(f"'{n}' is not a projector", s)
                outcomes[n] = m
            total_op = sum(outcomes.values())
            if float(np.max(np.abs(total_op - np.eye(total)))) > TOL:
                raise _Bad(f"PVM incomplete: projectors of '{decl.name}' do not sum to the identity", decl.span)
            ms = list(outcomes.values())
            for j in range(len(ms)):
                for k in range(j + 1, len(ms)):
                    if float(np.max(np.abs(ms[j] @ ms[k]))) > TOL:
                        raise _Bad(f"PVM '{decl.name}' has non-orthogonal projectors", decl.span)
            for n in outcomes:
                outcome_owner[n] = decl.name
            pvms[decl.name] = outcomes
        elif decl.kind == "query":
            assert isinstance(p, QueryExpr)
            if p.final not in outcome_owner:
                raise _Bad(f"'{p.final}' is not an outcome of any declared pvm", p.final_span or decl.span)
            if p.effect not in probes:
                raise _Bad(f"'{p.effect}' is not a declared probe", p.effect_span or decl.span)
            queries.append(Query(decl.name, p.kind, p.final, p.effect))


def elaborate(doc: ScenarioDoc, name: str = "dsl") -> Scenario:
    """Evaluate and validate a document.

    Raises :class:`DslError` listing every problem found. Warnings, such as
    auto-normalized kets, are returned in ``Scenario.warnings``.
    """
    if not doc.declarations:
        raise DslError([Diagnostic("error", "expected at least one declaration", 1, 1)])
    return _Elaborator(doc).run(name)

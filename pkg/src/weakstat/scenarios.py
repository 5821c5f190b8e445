"""Scenarios and their exact evaluation.

A :class:`Scenario` pairs an initial state and its projective final
measurements with the probe operators queried in between. :func:`evaluate`
turns it into a :class:`ScenarioReport` of exact values.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from . import operators as ops
from .errors import BadDimension, DimMismatch, MissingEvents, WrongScenario
from .tomography import (
    PROB_CUTOFF,
    ConditionalState,
    check_pvm,
    conditional_probability,
    conditional_state,
    decompose,
    joint_probability,
    recombine,
)

SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class Query:
    label: str
    kind: str  # "joint" or "cond"
    final: str  # outcome label of a final measurement
    effect: str  # probe label

    def __post_init__(self):
        if self.kind not in ("joint", "cond"):
            raise ValueError(f"query kind must be 'joint' or 'cond', got {self.kind!r}")


@dataclass(frozen=True)
class Scenario:
    name: str
    dim_a: int
    dim_b: int
    initial: np.ndarray = field(repr=False)
    measurements: Mapping[str, Mapping[str, np.ndarray]] = field(repr=False)
    probes: Mapping[str, np.ndarray] = field(repr=False)
    queries: tuple[Query, ...] = ()
    meta: Mapping[str, object] = field(default_factory=dict, repr=False)
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        d = self.dim
        rho = ops.as_density(self.initial)
        if rho.shape != (d, d):
            raise DimMismatch(f"initial state has shape {rho.shape}, expected ({d}, {d})")
        object.__setattr__(self, "initial", rho)
        if not self.measurements:
            raise ValueError("a scenario needs at least one final measurement")
        seen: set[str] = set()
        measurements = {}
        for mname, outcomes in self.measurements.items():
            projs = check_pvm(list(outcomes.values()), d)
            for lab in outcomes:
                if lab in seen:
                    raise ValueError(f"outcome label {lab!r} is used twice")
                seen.add(lab)
            measurements[mname] = dict(zip(outcomes, projs))
        object.__setattr__(self, "measurements", measurements)
        probes = {}
        for lab, op in self.probes.items():
            h = ops.as_hermitian(op)
            if h.shape != (d, d):
                raise DimMismatch(f"probe {lab!r} has shape {h.shape}, expected ({d}, {d})")
            probes[lab] = h
        object.__setattr__(self, "probes", probes)
        for q in self.queries:
            if q.final not in seen:
                raise KeyError(f"query {q.label!r} refers to unknown outcome {q.final!r}")
            if q.effect not in probes:
                raise KeyError(f"query {q.label!r} refers to unknown probe {q.effect!r}")

    @property
    def dim(self) -> int:
        return self.dim_a * self.dim_b

    @property
    def final_pvm(self) -> dict[str, np.ndarray]:
        """The first declared final measurement."""
        return dict(next(iter(self.measurements.values())))

    def outcome(self, label: str) -> np.ndarray:
        for outcomes in self.measurements.values():
            if label in outcomes:
                return outcomes[label]
        raise KeyError(label)


@dataclass(frozen=True)
class Event:
    label: str
    value_plus: int  # value of (X+Y) S+
    value_minus: int  # value of (X-Y) S-
    probability: float

    @property
    def value(self) -> int:
        return self.value_plus + self.value_minus


@dataclass(frozen=True)
class ScenarioReport:
    name: str
    exact_values: dict[str, float]
    conditional_states: dict[str, ConditionalState]
    eigen_summaries: dict[str, np.ndarray]
    aggregate: float | None = None
    events: tuple[Event, ...] = ()
    marginals: dict[str, np.ndarray] = field(default_factory=dict)
    mixture_residual: float = 0.0


def _query_value(scenario: Scenario, q: Query, states: Mapping[str, ConditionalState]) -> float:
    effect = scenario.probes[q.effect]
    if q.kind == "joint":
        return joint_probability(scenario.initial, scenario.outcome(q.final), effect)
    if q.final not in states:
        return float("nan")
    return conditional_probability(states[q.final], effect)


def evaluate(scenario: Scenario, cutoff: float = PROB_CUTOFF) -> ScenarioReport:
    """Exact conditional states of a scenario, with query values and spectra.

    ``cond`` queries on a zero-probability outcome evaluate to NaN. The
    ``mixture_residual`` is the largest deviation of ``sum_f p(f|i) R_if``
    from the initial state over all final measurements.
    """
    rho = scenario.initial
    states: dict[str, ConditionalState] = {}
    eig: dict[str, np.ndarray] = {}
    residual = 0.0
    for outcomes in scenario.measurements.values():
        total = np.zeros_like(rho)
        for lab, proj in outcomes.items():
            if np.trace(rho @ proj).real > cutoff:
                st = conditional_state(rho, proj, cutoff, outcome=lab)
                states[lab] = st
                eig[f"R[{lab}]"] = st.eigenvalues()
                total = total + st.preparation_prob * st.op
        residual = max(residual, float(np.max(np.abs(total - rho))))
    for lab, op in scenario.probes.items():
        eig[lab] = np.linalg.eigvalsh(op)
    values = {q.label: _query_value(scenario, q, states) for q in scenario.queries}
    marginals = {}
    if scenario.dim_b > 1 and scenario.dim_a > 1:
        for lab, st in states.items():
            marginals[f"TrA R[{lab}]"] = ops.partial_trace(st.op, scenario.dim_a, scenario.dim_b, "B")
    return ScenarioReport(scenario.name, values, states, eig, None, (), marginals, residual)


def double_slit_scenario() -> Scenario:
    """Which-path measurement on the equal superposition of two paths."""
    one, two = ops.basis_ket(2, 0), ops.basis_ket(2, 1)
    plus = (one + two) / SQRT2
    minus = (one - two) / SQRT2
    rho = ops.projector(plus)
    queries = []
    for f in ("path1", "path2"):
        for g in ("coherence", "anticoherence"):
            queries.append(Query(f"{g}|{f}", "cond", f, g))
            queries.append(Query(f"joint({f},{g})", "joint", f, g))
    return Scenario(
        name="double-slit",
        dim_a=2,
        dim_b=1,
        initial=rho,
        measurements={"which-path": {"path1": ops.projector(one), "path2": ops.projector(two)}},
        probes={"coherence": ops.projector(plus), "anticoherence": ops.projector(minus)},
        queries=tuple(queries),
    )


def entangled_scenario(d: int, f=None) -> Scenario:
    """Local projective measurement on A of the maximally entangled state.

    ``f`` defaults to ``|0>``. The measurement on A completes ``|f><f|`` to
    an orthonormal basis, labelled ``f, f1, ..., f{d-1}``. The probe
    ``fstar`` is ``1 ⊗ |f*><f*|`` with ``f*`` the complex conjugate of
    ``f`` in the computational basis.
    """
    if int(d) != d or not 2 <= d <= 8:
        raise BadDimension(f"entangled scenario needs 2 <= d <= 8, got {d}")
    d = int(d)
    f = ops.basis_ket(d, 0) if f is None else np.asarray(f, dtype=complex)
    if f.shape != (d,):
        raise BadDimension(f"f must have {d} amplitudes, got shape {f.shape}")
    f = ops.as_ket(f)
    e = ops.maximally_entangled(d)
    eye = np.eye(d, dtype=complex)
    basis = ops.complete_basis(f)
    labels = ["f"] + [f"f{k}" for k in range(1, d)]
    outcomes = {lab: ops.tensor_product(ops.projector(v), eye) for lab, v in zip(labels, basis)}
    fstar = f.conj()
    probes = {"fstar": ops.tensor_product(eye, ops.projector(fstar))}
    queries = (
        Query("fstar|f", "cond", "f", "fstar"),
        Query("joint(f,fstar)", "joint", "f", "fstar"),
    )
    return Scenario(
        name=f"entangled:d={d}",
        dim_a=d,
        dim_b=d,
        initial=ops.projector(e),
        measurements={"A-basis": outcomes},
        probes=probes,
        queries=queries,
        meta={"f": f, "fstar": fstar},
    )


def bell_operators() -> dict[tuple[int, int], np.ndarray]:
    """The four ``Pi(x, y) = (1 + x X + y Y) / 4`` on one qubit."""
    x, y = ops.PAULI_X, ops.PAULI_Y
    return {(sx, sy): (np.eye(2) + sx * x + sy * y) / 4 for sx in (1, -1) for sy in (1, -1)}


def _spin_label(sign: int) -> str:
    return "+1" if sign > 0 else "-1"


def bell_chsh_scenario(initial=None) -> Scenario:
    """Two qubits; A measures S+ or S-, B is probed by the four Pi(x, y).

    A's projectors are complex conjugates of the S+/S- eigenprojectors, so
    on the maximally entangled state outcome ``S+=s`` leaves B in the S+
    eigenstate with eigenvalue ``s``. ``initial`` replaces the entangled
    state, e.g. with a product state for the classical control.
    """
    x, y = ops.PAULI_X, ops.PAULI_Y
    spins = {"S+": (x + y) / SQRT2, "S-": (x - y) / SQRT2}
    eye = np.eye(2, dtype=complex)
    measurements = {}
    for name, s_op in spins.items():
        vals, vecs = ops.hermitian_eig(s_op)
        outcomes = {}
        for val, k in sorted(zip(vals, range(2)), reverse=True):
            sign = 1 if val > 0 else -1
            outcomes[f"{name}={_spin_label(sign)}"] = ops.tensor_product(
                ops.projector(vecs[:, k].conj()), eye
            )
        measurements[name] = outcomes
    local = bell_operators()
    probes = {f"Pi({_spin_label(a)},{_spin_label(b)})": ops.tensor_product(eye, p) for (a, b), p in local.items()}
    queries = []
    for outcomes in measurements.values():
        for f in outcomes:
            for g in probes:
                queries.append(Query(f"p({f};{g})", "joint", f, g))
    rho = ops.projector(ops.maximally_entangled(2)) if initial is None else initial
    return Scenario(
        name="bell-chsh",
        dim_a=2,
        dim_b=2,
        initial=rho,
        measurements=measurements,
        probes=probes,
        queries=tuple(queries),
        meta={"spins": spins, "local_effects": local},
    )


_BELL_ROWS = (
    ("(X+Y)S+=+2 and (X-Y)S-=0", "S+", +1, +1),
    ("(X+Y)S+=0 and (X-Y)S-=+2", "S-", -1, +1),
    ("(X+Y)S+=-2 and (X-Y)S-=0", "S+", +1, -1),
    ("(X+Y)S+=0 and (X-Y)S-=-2", "S-", -1, -1),
)


def bell_joint_table(scenario: Scenario) -> ScenarioReport:
    """Joint quasi-probabilities of S± with the local X/Y effects, plus the four table events.

    ``p(s, x, y)`` is evaluated for both A settings. Outcomes with ``x = y``
    are assigned to the S+ setting and those with ``x = -y`` to the S-
    setting, since only there is the corresponding product non-zero. The
    four resulting events carry all of the probability mass; the per-setting
    zero-valued events are reported in ``exact_values`` as well.
    """
    need = {f"{s}={_spin_label(v)}" for s in ("S+", "S-") for v in (1, -1)}
    have = {lab for outcomes in scenario.measurements.values() for lab in outcomes}
    pis = {(a, b): f"Pi({_spin_label(a)},{_spin_label(b)})" for a in (1, -1) for b in (1, -1)}
    if scenario.name != "bell-chsh" or not need <= have or not set(pis.values()) <= set(scenario.probes):
        raise WrongScenario(f"scenario {scenario.name!r} is not a Bell-CHSH scenario")
    report = evaluate(scenario)
    rho = scenario.initial

    def p(setting: str, s: int, xv: int, yv: int) -> float:
        return joint_probability(
            rho, scenario.outcome(f"{setting}={_spin_label(s)}"), scenario.probes[pis[(xv, yv)]]
        )

    values = dict(report.exact_values)
    for setting, rel in (("S+", 1), ("S-", -1)):
        name = "(X+Y)S+" if setting == "S+" else "(X-Y)S-"
        table = {2: 0.0, 0: 0.0, -2: 0.0}
        for s in (1, -1):
            for xv in (1, -1):
                for yv in (1, -1):
                    table[(xv + rel * yv) * s] += p(setting, s, xv, yv)
        for v, prob in table.items():
            values[f"{name}={v:+d}" if v else f"{name}=0"] = prob

    events = []
    for label, setting, rel, sign in _BELL_ROWS:
        prob = sum(p(setting, sign * xv, xv, rel * xv) for xv in (1, -1))
        vp = 2 * sign if setting == "S+" else 0
        vm = 2 * sign if setting == "S-" else 0
        events.append(Event(label, vp, vm, prob))
    eig = dict(report.eigen_summaries)
    for (a, b), op in scenario.meta.get("local_effects", bell_operators()).items():
        eig[f"local {pis[(a, b)]}"] = np.linalg.eigvalsh(op)
    out = ScenarioReport(
        scenario.name,
        values,
        report.conditional_states,
        eig,
        None,
        tuple(events),
        report.marginals,
        report.mixture_residual,
    )
    return replace(out, aggregate=chsh_value(out))


def chsh_value(report: ScenarioReport) -> float:
    """Mean of ``(X+Y)S+ + (X-Y)S-`` over the table events."""
    labels = {e.label for e in report.events}
    missing = [row[0] for row in _BELL_ROWS if row[0] not in labels]
    if missing:
        raise MissingEvents(f"report lacks the Bell table events {missing}")
    return float(sum(e.value * e.probability for e in report.events))


_ENTANGLED = re.compile(r"entangled:d=(\d+)$")

BUILTIN_NAMES = ("double-slit", "entangled:d=<n>", "bell-chsh")


def builtin(name: str) -> Scenario:
    """Look up a built-in scenario by its CLI name."""
    if name == "double-slit":
        return double_slit_scenario()
    if name == "bell-chsh":
        return bell_chsh_scenario()
    m = _ENTANGLED.match(name)
    if m:
        return entangled_scenario(int(m.group(1)))
    raise KeyError(f"unknown scenario {name!r}; built-ins are {', '.join(BUILTIN_NAMES)}")


def is_builtin(name: str) -> bool:
    return name in ("double-slit", "bell-chsh") or bool(_ENTANGLED.match(name))


def mixture_identity_residual(rho, pvm: Sequence) -> float:
    return float(np.max(np.abs(recombine(decompose(rho, pvm)) - ops.as_density(rho))))

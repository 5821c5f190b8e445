"""Weak-measurement tomography.

A weak measurement of strength ``eps`` has outcome effects
``E_m = w_m (1 + eps S_m)``. Its outcome probabilities shift away from the
weights ``w_m`` by an amount linear in the expectation values of the probe
operators ``S_m``, which is enough to reconstruct the state. Post-selecting
on a later projective outcome ``f`` yields the conditional state

    R_if = (rho Pi_f + Pi_f rho) / (2 Tr{rho Pi_f}),

a unit-trace Hermitian operator that may have negative eigenvalues. The
same symmetrized product gives joint quasi-probabilities of ``f`` and any
other outcome ``g``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import operators as ops
from .errors import (
    DimMismatch,
    IncompletePVM,
    SingularGram,
    StrengthTooLarge,
    ZeroProbabilityOutcome,
)

PROB_CUTOFF = 1e-12
_NORM_SLACK = 1e-12
_MAX_GRAM_COND = 1e12


@dataclass(frozen=True)
class TomographyBasis:
    """Identity followed by ``d**2 - 1`` traceless Hermitian probes."""

    dim: int
    labels: tuple[str, ...]
    operators: tuple[np.ndarray, ...]
    gram: np.ndarray = field(repr=False)

    @classmethod
    def from_operators(cls, labels: Sequence[str], operators: Sequence[np.ndarray]) -> "TomographyBasis":
        """Build a basis from traceless probes; the identity is prepended."""
        probes = [ops.as_hermitian(o) for o in operators]
        if not probes:
            raise SingularGram("a tomography basis needs at least one probe")
        d = probes[0].shape[0]
        if any(p.shape != (d, d) for p in probes):
            raise DimMismatch("probe operators have different dimensions")
        if len(set(labels)) != len(labels) or len(labels) != len(probes):
            raise ValueError("probe labels must be unique, one per operator")
        if len(probes) != d * d - 1:
            raise SingularGram(f"need {d * d - 1} traceless probes for d={d}, got {len(probes)}")
        for lab, p in zip(labels, probes):
            if abs(np.trace(p)) > ops.STRUCT_TOL:
                raise SingularGram(f"probe {lab!r} is not traceless")
        gram = np.array([[np.trace(a @ b).real for b in probes] for a in probes])
        if np.linalg.cond(gram) > _MAX_GRAM_COND:
            raise SingularGram("probe operators are not linearly independent")
        gram.setflags(write=False)
        identity = ops._frozen(np.eye(d))
        return cls(d, ("I", *labels), (identity, *probes), gram)

    @property
    def probe_labels(self) -> tuple[str, ...]:
        return self.labels[1:]

    @property
    def probes(self) -> tuple[np.ndarray, ...]:
        return self.operators[1:]


def gell_mann_basis(d: int) -> TomographyBasis:
    """Standard basis: Paulis for a qubit, generalized Gell-Mann for d > 2."""
    pairs = ops.gell_mann(d)
    return TomographyBasis.from_operators([p[0] for p in pairs], [p[1] for p in pairs])


@dataclass(frozen=True)
class WeakOutcome:
    label: str
    weight: float
    probe: str
    sign: int
    operator: np.ndarray = field(repr=False)  # the signed probe S_m


@dataclass(frozen=True)
class WeakPOVM:
    dim: int
    strength: float
    outcomes: tuple[WeakOutcome, ...]

    @property
    def labels(self) -> list[str]:
        return [o.label for o in self.outcomes]

    @property
    def weights(self) -> np.ndarray:
        return np.array([o.weight for o in self.outcomes])

    def effects(self) -> list[np.ndarray]:
        eye = np.eye(self.dim, dtype=complex)
        return [o.weight * (eye + self.strength * o.operator) for o in self.outcomes]

    def __len__(self) -> int:
        return len(self.outcomes)


def build_weak_povm(basis: TomographyBasis, strength: float) -> WeakPOVM:
    """Weak POVM with one ``±S`` outcome pair per traceless basis probe.

    All ``2 (d**2 - 1)`` outcomes share the weight ``1 / (2 (d**2 - 1))``, so
    the signed probes cancel and the effects sum to the identity.
    """
    if not strength > 0:
        raise StrengthTooLarge(f"strength must be positive, got {strength}")
    n = len(basis.probes)
    w = 1.0 / (2 * n)
    outcomes = []
    for label, s in zip(basis.probe_labels, basis.probes):
        norm = float(np.linalg.norm(s, 2))
        if strength * norm > 1.0 + _NORM_SLACK:
            raise StrengthTooLarge(
                f"strength {strength} times |{label}| = {strength * norm:.6g} exceeds 1"
            )
        outcomes.append(WeakOutcome("+" + label, w, label, +1, s))
        outcomes.append(WeakOutcome("-" + label, w, label, -1, ops._frozen(-s)))
    return WeakPOVM(basis.dim, float(strength), tuple(outcomes))


def _check_dim(a: np.ndarray, d: int) -> None:
    if a.shape != (d, d):
        raise DimMismatch(f"operator of shape {a.shape} does not act on dimension {d}")


def outcome_probabilities(rho, povm: WeakPOVM) -> np.ndarray:
    """``p(m) = Tr{rho E_m} = w_m (1 + eps Tr{rho S_m})`` for every outcome."""
    rho = ops.as_density(rho)
    _check_dim(rho, povm.dim)
    return np.array(
        [o.weight * (1.0 + povm.strength * np.trace(rho @ o.operator).real) for o in povm.outcomes]
    )


def reconstruct_expectations(probs: Sequence[float], povm: WeakPOVM) -> dict[str, float]:
    """Invert outcome statistics into probe expectation values.

    Each outcome gives ``<S_m> = (p_m - w_m) / (w_m eps)``; the two signs of
    a probe are averaged, which cancels any common offset in ``p_m``.
    """
    probs = np.asarray(probs, dtype=float)
    if probs.shape != (len(povm),):
        raise DimMismatch(f"expected {len(povm)} probabilities, got {probs.shape}")
    sums: dict[str, float] = {}
    counts: dict[str, int] = {}
    for p, o in zip(probs, povm.outcomes):
        est = o.sign * (p - o.weight) / (o.weight * povm.strength)
        sums[o.probe] = sums.get(o.probe, 0.0) + est
        counts[o.probe] = counts.get(o.probe, 0) + 1
    return {k: sums[k] / counts[k] for k in sums}


def density_from_expectations(expectations: Mapping[str, float], basis: TomographyBasis) -> np.ndarray:
    missing = [lab for lab in basis.probe_labels if lab not in expectations]
    if missing:
        raise KeyError(f"missing expectation values for {missing}")
    e = np.array([float(expectations[lab]) for lab in basis.probe_labels])
    try:
        c = np.linalg.solve(basis.gram, e)
    except np.linalg.LinAlgError as exc:
        raise SingularGram(str(exc)) from exc
    d = basis.dim
    out = np.eye(d, dtype=complex) / d
    for ck, s in zip(c, basis.probes):
        out = out + ck * s
    return 0.5 * (out + out.conj().T)


def reconstruct_density(expectations: Mapping[str, float], basis: TomographyBasis) -> np.ndarray:
    """Unit-trace Hermitian operator with the given probe expectation values.

    Positivity is not enforced, so the same routine reconstructs conditional
    states with negative eigenvalues.
    """
    return ops.as_hermitian(density_from_expectations(expectations, basis))


def expansion_matrix(basis: TomographyBasis) -> np.ndarray:
    """Linear map from probe expectations to matrix entries.

    Returns an array ``T`` of shape ``(d, d, n)`` with
    ``R[j, k] = delta_jk / d + sum_n T[j, k, n] e_n``.
    """
    ginv = np.linalg.inv(basis.gram)
    stack = np.stack(basis.probes, axis=-1)
    return stack @ ginv.T


@dataclass(frozen=True)
class ConditionalState:
    """Post-selected state ``R_if`` with the probability of its outcome."""

    op: np.ndarray
    preparation_prob: float
    outcome: object = None

    @property
    def dim(self) -> int:
        return self.op.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.op)

    @property
    def is_positive(self) -> bool:
        return bool(self.eigenvalues()[0] >= -ops.STRUCT_TOL)


def _hermitian_like(a, d: int | None = None) -> np.ndarray:
    a = ops.as_hermitian(a)
    if d is not None:
        _check_dim(a, d)
    return a


def joint_outcome_probability(rho, effect, final) -> float:
    """``p(m, f | i) = Tr{E_m (rho Pi_f + Pi_f rho) / 2}``."""
    rho = ops.as_density(rho)
    d = rho.shape[0]
    effect = _hermitian_like(effect, d)
    final = _hermitian_like(final, d)
    return float(np.trace(effect @ ops.jordan_product(rho, final)).real)


def preparation_probability(rho, final) -> float:
    """``p(f | i) = Tr{rho Pi_f}``."""
    rho = ops.as_density(rho)
    final = _hermitian_like(final, rho.shape[0])
    return float(np.trace(rho @ final).real)


def conditional_state(rho, final, cutoff: float = PROB_CUTOFF, outcome: object = None) -> ConditionalState:
    rho = ops.as_density(rho)
    final = ops.as_projector(final)
    _check_dim(final, rho.shape[0])
    p = float(np.trace(rho @ final).real)
    if p <= cutoff:
        raise ZeroProbabilityOutcome(
            f"outcome has probability {p:.3g}; the conditional state is undefined"
        )
    r = ops.jordan_product(rho, final) / p
    return ConditionalState(ops._frozen(r), p, outcome)


def check_pvm(pvm: Sequence, d: int | None = None, tol: float = ops.STRUCT_TOL) -> list[np.ndarray]:
    """Validate a complete set of mutually orthogonal projectors."""
    if len(pvm) == 0:
        raise IncompletePVM("empty measurement")
    projs = [ops.as_projector(p) for p in pvm]
    d = projs[0].shape[0] if d is None else d
    for p in projs:
        _check_dim(p, d)
    if not ops.is_complete(projs, tol):
        raise IncompletePVM("projectors do not sum to the identity")
    for j in range(len(projs)):
        for k in range(j + 1, len(projs)):
            if float(np.max(np.abs(projs[j] @ projs[k]))) > tol:
                raise IncompletePVM(f"projectors {j} and {k} are not orthogonal")
    return projs


def decompose(rho, pvm: Sequence, cutoff: float = PROB_CUTOFF) -> list[ConditionalState]:
    """Split ``rho`` into ``sum_f p(f|i) R_if`` over a projective measurement.

    Outcomes with probability at or below ``cutoff`` are omitted; the
    ``outcome`` field of each returned state is its index in ``pvm``.
    """
    rho = ops.as_density(rho)
    projs = check_pvm(pvm, rho.shape[0])
    out = []
    for k, p in enumerate(projs):
        if np.trace(rho @ p).real > cutoff:
            out.append(conditional_state(rho, p, cutoff, outcome=k))
    return out


def recombine(states: Sequence[ConditionalState]) -> np.ndarray:
    return sum(s.preparation_prob * s.op for s in states)


def conditional_probability(cond: ConditionalState, effect) -> float:
    """``p(g | i, f) = Tr{R_if Phi_g}``; negative or above one in general."""
    effect = _hermitian_like(effect, cond.dim)
    return float(np.trace(cond.op @ effect).real)


def joint_probability(rho, final, effect) -> float:
    """``p(f, g | i) = Tr{rho (Pi_f Phi_g + Phi_g Pi_f) / 2}``.

    Symmetric in ``final`` and ``effect``. ``effect`` may be any Hermitian
    operator, which is how quasi-probability operators such as the
    symmetrized products of non-commuting projectors are evaluated.
    """
    rho = ops.as_density(rho)
    d = rho.shape[0]
    final = _hermitian_like(final, d)
    effect = _hermitian_like(effect, d)
    return float(np.trace(rho @ ops.jordan_product(final, effect)).real)

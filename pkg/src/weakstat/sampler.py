"""Finite-shot Monte Carlo of weak and weak-then-strong measurements.

Randomness is counter based: shot ``i`` of seed ``s`` always consumes the
same two uniforms, whatever the number of shards, so counts are a pure
function of ``(seed, shots)``.

The sequential model applies the weak measurement through the Kraus
operators ``M_m = sqrt(E_m)`` and then measures the projective ``Pi_f`` on
the disturbed state. Its joint statistics agree with the symmetrized
formula ``Tr{E_m (rho Pi_f + Pi_f rho) / 2}`` up to terms of order eps**2.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import kernels
from . import operators as ops
from .errors import DimMismatch, InsufficientPostSelection
from .tomography import (
    ConditionalState,
    TomographyBasis,
    WeakPOVM,
    check_pvm,
    density_from_expectations,
    expansion_matrix,
    outcome_probabilities,
)

MIN_POSTSELECTED = 100
_MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class SampleConfig:
    shots: int
    seed: int = 0
    shards: int = 1

    def __post_init__(self):
        if int(self.shots) != self.shots or self.shots < 1:
            raise ValueError(f"shots must be a positive integer, got {self.shots}")
        if int(self.seed) != self.seed or not 0 <= self.seed <= _MAX_SEED:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if int(self.shards) != self.shards or self.shards < 1:
            raise ValueError(f"shards must be a positive integer, got {self.shards}")


@dataclass(frozen=True)
class CountTable:
    """Outcome counts; 2-D ``counts[m, f]`` when a final measurement was made."""

    weak_labels: tuple[str, ...]
    counts: np.ndarray
    final_labels: tuple[str, ...] | None = None

    @property
    def shots(self) -> int:
        return int(self.counts.sum())

    def weak_counts(self) -> np.ndarray:
        return self.counts if self.counts.ndim == 1 else self.counts.sum(axis=1)

    def final_index(self, outcome) -> int:
        if self.final_labels is None:
            raise ValueError("count table has no final-measurement outcomes")
        if isinstance(outcome, (int, np.integer)) and not isinstance(outcome, bool):
            if not 0 <= outcome < len(self.final_labels):
                raise KeyError(f"final outcome index {outcome} out of range")
            return int(outcome)
        try:
            return self.final_labels.index(outcome)
        except ValueError:
            raise KeyError(f"unknown final outcome {outcome!r}") from None

    def as_dict(self) -> dict[str, int]:
        if self.final_labels is None:
            return {lab: int(n) for lab, n in zip(self.weak_labels, self.counts)}
        return {
            f"{m},{f}": int(self.counts[j, k])
            for j, m in enumerate(self.weak_labels)
            for k, f in enumerate(self.final_labels)
        }


class Estimate(NamedTuple):
    mean: float
    stderr: float


@dataclass(frozen=True)
class EstimateReport:
    estimates: dict[str, Estimate]
    shots_used: int


@dataclass(frozen=True)
class ConditionalEstimate(ConditionalState):
    """A reconstructed conditional state with per-entry standard errors.

    ``stderr[j, k]`` combines the real and imaginary parts of entry
    ``(j, k)`` in quadrature and includes the multinomial correlations
    between outcome frequencies.
    """

    stderr: np.ndarray = field(default=None, repr=False)
    expectations: EstimateReport | None = None


def _cdf(p: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(np.clip(p, 0.0, None))
    cdf[-1] = 1.0
    return np.ascontiguousarray(cdf, dtype=np.float64)


def _chunks(shots: int, shards: int) -> list[tuple[int, int]]:
    bounds = np.linspace(0, shots, shards + 1).astype(np.int64)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def _run_sharded(cfg: SampleConfig, shape: tuple[int, ...], work) -> np.ndarray:
    """Run ``work(start, stop, counts)`` over shot chunks and sum the counts."""
    chunks = _chunks(cfg.shots, cfg.shards)
    parts = [np.zeros(shape, dtype=np.int64) for _ in chunks]
    if len(chunks) == 1:
        work(*chunks[0], parts[0])
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            list(pool.map(lambda a: work(*a[0], a[1]), zip(chunks, parts)))
    return sum(parts[1:], start=parts[0])


def sample_weak(rho, povm: WeakPOVM, cfg: SampleConfig) -> CountTable:
    """Draw ``cfg.shots`` independent weak-measurement outcomes."""
    cdf = _cdf(outcome_probabilities(rho, povm))
    key = kernels.stream_key(cfg.seed)

    def work(start, stop, counts):
        kernels.count_categorical(key, start, stop, cdf, counts)

    counts = _run_sharded(cfg, (len(povm),), work)
    return CountTable(tuple(povm.labels), counts)


def kraus_operators(povm: WeakPOVM) -> list[np.ndarray]:
    """Principal square roots ``M_m = sqrt(E_m)`` of the weak effects."""
    out = []
    for e in povm.effects():
        lam, v = np.linalg.eigh(0.5 * (e + e.conj().T))
        out.append((v * np.sqrt(np.clip(lam, 0.0, None))) @ v.conj().T)
    return out


def sequential_probabilities(rho, povm: WeakPOVM, pvm: Sequence) -> np.ndarray:
    """Exact ``p(m, f) = Tr{Pi_f M_m rho M_m^dag}`` of the sequential model."""
    rho = ops.as_density(rho)
    if rho.shape[0] != povm.dim:
        raise DimMismatch(f"state has dimension {rho.shape[0]}, POVM acts on {povm.dim}")
    projs = check_pvm(pvm, povm.dim)
    out = np.empty((len(povm), len(projs)))
    for j, m in enumerate(kraus_operators(povm)):
        post = m @ rho @ m.conj().T
        for k, p in enumerate(projs):
            out[j, k] = np.trace(p @ post).real
    return out


def sample_sequential(
    rho,
    povm: WeakPOVM,
    pvm: Sequence,
    cfg: SampleConfig,
    final_labels: Sequence[str] | None = None,
) -> CountTable:
    """Weak measurement followed by a projective one, shot by shot.

    Each shot draws ``m`` with probability ``Tr{E_m rho}``, then ``f`` from
    the post-measurement state ``M_m rho M_m^dag / p(m)``.
    """
    p_m = outcome_probabilities(rho, povm)
    joint = sequential_probabilities(rho, povm, pvm)
    n_f = joint.shape[1]
    cond = np.empty_like(joint)
    for j in range(len(povm)):
        if p_m[j] > 0:
            cond[j] = _cdf(joint[j] / p_m[j])
        else:
            cond[j] = np.arange(1, n_f + 1) / n_f
    cdf_first = _cdf(p_m)
    cdf_second = np.ascontiguousarray(cond)
    key = kernels.stream_key(cfg.seed)

    def work(start, stop, counts):
        kernels.count_two_stage(key, start, stop, cdf_first, cdf_second, counts)

    counts = _run_sharded(cfg, (len(povm), n_f), work)
    if final_labels is None:
        final_labels = [str(k) for k in range(n_f)]
    if len(final_labels) != n_f:
        raise DimMismatch("one label per projector is required")
    return CountTable(tuple(povm.labels), counts, tuple(final_labels))


def _linear_estimator(povm: WeakPOVM) -> tuple[list[str], np.ndarray, np.ndarray]:
    """Expectations as ``A @ p + c`` over outcome frequencies ``p``.

    Rows follow the probe order of the POVM; signed outcomes of the same
    probe are averaged.
    """
    probes: list[str] = []
    for o in povm.outcomes:
        if o.probe not in probes:
            probes.append(o.probe)
    group = {name: [j for j, o in enumerate(povm.outcomes) if o.probe == name] for name in probes}
    a = np.zeros((len(probes), len(povm)))
    c = np.zeros(len(probes))
    for r, name in enumerate(probes):
        members = group[name]
        for j in members:
            o = povm.outcomes[j]
            scale = o.sign / (o.weight * povm.strength * len(members))
            a[r, j] += scale
            c[r] -= scale * o.weight
    return probes, a, c


def _estimate(freqs: np.ndarray, n: int, povm: WeakPOVM) -> tuple[list[str], np.ndarray, np.ndarray]:
    probes, a, c = _linear_estimator(povm)
    mean = a @ freqs + c
    cov_p = (np.diag(freqs) - np.outer(freqs, freqs)) / n
    cov = a @ cov_p @ a.T
    return probes, mean, cov


def estimate_expectations(counts: CountTable, povm: WeakPOVM) -> EstimateReport:
    """Probe expectation values with multinomial standard errors."""
    weak = counts.weak_counts()
    if weak.shape != (len(povm),):
        raise DimMismatch("count table does not match the POVM outcomes")
    n = int(weak.sum())
    probes, mean, cov = _estimate(weak / n, n, povm)
    err = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    return EstimateReport({p: Estimate(float(m), float(s)) for p, m, s in zip(probes, mean, err)}, n)


def _reconstruct(
    freqs: np.ndarray, n: int, povm: WeakPOVM, basis: TomographyBasis
) -> tuple[np.ndarray, np.ndarray, EstimateReport]:
    if basis.dim != povm.dim:
        raise DimMismatch("tomography basis and POVM act on different dimensions")
    probes, mean, cov = _estimate(freqs, n, povm)
    order = [probes.index(lab) for lab in basis.probe_labels]
    mean, cov = mean[order], cov[np.ix_(order, order)]
    expectations = dict(zip(basis.probe_labels, mean))
    r = density_from_expectations(expectations, basis)
    t = expansion_matrix(basis)
    var_re = np.einsum("jkn,nm,jkm->jk", t.real, cov, t.real)
    var_im = np.einsum("jkn,nm,jkm->jk", t.imag, cov, t.imag)
    stderr = np.sqrt(np.clip(var_re, 0.0, None) + np.clip(var_im, 0.0, None))
    err = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    report = EstimateReport(
        {lab: Estimate(float(m), float(s)) for lab, m, s in zip(basis.probe_labels, mean, err)}, n
    )
    return r, stderr, report


def estimate_density(counts: CountTable, povm: WeakPOVM, basis: TomographyBasis) -> ConditionalEstimate:
    """Reconstruct the unconditioned state from weak-measurement counts."""
    weak = counts.weak_counts()
    n = int(weak.sum())
    r, stderr, report = _reconstruct(weak / n, n, povm, basis)
    return ConditionalEstimate(ops._frozen(r), 1.0, None, stderr, report)


def estimate_conditional_state(
    counts: CountTable, povm: WeakPOVM, basis: TomographyBasis, outcome_f
) -> ConditionalEstimate:
    """Reconstruct ``R_if`` from the shots post-selected on final outcome ``f``.

    Raises :class:`InsufficientPostSelection` if any probe pair has fewer
    than ``MIN_POSTSELECTED`` post-selected shots.
    """
    if counts.counts.ndim != 2:
        raise ValueError("conditional estimation needs sequential counts")
    k = counts.final_index(outcome_f)
    column = counts.counts[:, k]
    n_f = int(column.sum())
    pair_totals: dict[str, int] = {}
    for o, n in zip(povm.outcomes, column):
        pair_totals[o.probe] = pair_totals.get(o.probe, 0) + int(n)
    short = [p for p, n in pair_totals.items() if n < MIN_POSTSELECTED]
    if n_f == 0 or short:
        raise InsufficientPostSelection(
            f"outcome {counts.final_labels[k]!r}: {n_f} post-selected shots; "
            f"need at least {MIN_POSTSELECTED} per probe pair"
        )
    r, stderr, report = _reconstruct(column / n_f, n_f, povm, basis)
    r = r / np.trace(r).real
    return ConditionalEstimate(
        ops._frozen(r), n_f / counts.shots, counts.final_labels[k], stderr, report
    )

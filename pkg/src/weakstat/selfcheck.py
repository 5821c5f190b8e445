"""Fast invariant checks behind ``weakstat check``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels_py, kernels
from . import operators as ops
from .dsl import load, reference_source
from .sampler import SampleConfig, sample_sequential
from .scenarios import (
    bell_chsh_scenario,
    bell_joint_table,
    bell_operators,
    double_slit_scenario,
    entangled_scenario,
    evaluate,
    mixture_identity_residual,
)
from .tomography import (
    build_weak_povm,
    conditional_probability,
    conditional_state,
    gell_mann_basis,
    joint_probability,
    preparation_probability,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str


def random_density(rng: np.random.Generator, d: int, rank: int | None = None) -> np.ndarray:
    g = rng.normal(size=(d, rank or d)) + 1j * rng.normal(size=(d, rank or d))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_pvm(rng: np.random.Generator, d: int) -> list[np.ndarray]:
    u = random_unitary(rng, d)
    return [np.outer(u[:, k], u[:, k].conj()) for k in range(d)]


def _bell_spectra() -> tuple[bool, str]:
    want = np.array([(1 - np.sqrt(2)) / 4, (1 + np.sqrt(2)) / 4])
    err = 0.0
    for op in bell_operators().values():
        ev = np.linalg.eigvalsh(op)
        err = max(err, float(np.max(np.abs(ev - want))))
    return err < 1e-12, f"max error {err:.1e}"


def _chsh() -> tuple[bool, str]:
    rep = bell_joint_table(bell_chsh_scenario())
    mass = sum(e.probability for e in rep.events)
    ok = abs(rep.aggregate - 2 * np.sqrt(2)) < 1e-10 and abs(mass - 1) < 1e-10
    return ok, f"chsh {rep.aggregate:.10f}, mass {mass:.10f}"


def _double_slit() -> tuple[bool, str]:
    rep = evaluate(double_slit_scenario())
    r1 = rep.conditional_states["path1"].op
    want = np.array([[1, 0.5], [0.5, 0]])
    err = float(np.max(np.abs(r1 - want)))
    return err < 1e-12, f"R[path1] error {err:.1e}"


def _mixture(rng) -> tuple[bool, str]:
    worst = 0.0
    for d in (2, 3, 4, 5):
        for _ in range(10):
            worst = max(worst, mixture_identity_residual(random_density(rng, d), random_pvm(rng, d)))
    return worst < 1e-10, f"max residual {worst:.1e}"


def _locality(rng) -> tuple[bool, str]:
    worst = 0.0
    for d in (2, 3, 4):
        for _ in range(5):
            f = rng.normal(size=d) + 1j * rng.normal(size=d)
            sc = entangled_scenario(d, f / np.linalg.norm(f))
            rep = evaluate(sc)
            fstar = np.asarray(sc.meta["fstar"])
            worst = max(worst, float(np.max(np.abs(rep.marginals["TrA R[f]"] - np.outer(fstar, fstar.conj())))))
    return worst < 1e-10, f"max error {worst:.1e}"


def _chain(rng) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(20):
        d = int(rng.integers(2, 5))
        rho = random_density(rng, d)
        proj = random_pvm(rng, d)[0]
        phi = random_pvm(rng, d)[0]
        st = conditional_state(rho, proj)
        lhs = joint_probability(rho, proj, phi)
        rhs = preparation_probability(rho, proj) * conditional_probability(st, phi)
        worst = max(worst, abs(lhs - rhs))
    return worst < 1e-12, f"max error {worst:.1e}"


def _shards() -> tuple[bool, str]:
    sc = double_slit_scenario()
    povm = build_weak_povm(gell_mann_basis(2), 0.2)
    pvm = list(sc.final_pvm.values())
    a = sample_sequential(sc.initial, povm, pvm, SampleConfig(100_000, 7, 1))
    b = sample_sequential(sc.initial, povm, pvm, SampleConfig(100_000, 7, 4))
    return bool(np.array_equal(a.counts, b.counts)), "shards 1 and 4 agree"


def _backends() -> tuple[bool, str]:
    if kernels.BACKEND == "python":
        return True, "compiled backend unavailable; fallback in use"
    key = kernels.stream_key(11)
    cdf = np.array([0.1, 0.35, 0.7, 1.0])
    a = np.zeros(4, dtype=np.int64)
    b = np.zeros(4, dtype=np.int64)
    kernels.count_categorical(key, 0, 50_000, cdf, a)
    _kernels_py.count_categorical(key, 0, 50_000, cdf, b)
    return bool(np.array_equal(a, b)), "compiled and fallback counts agree"


def _dsl() -> tuple[bool, str]:
    ref = bell_chsh_scenario()
    sc = load(reference_source("bell"), "bell")
    err = float(np.max(np.abs(sc.initial - ref.initial)))
    for a, b in zip(sc.measurements.values(), ref.measurements.values()):
        for p, q in zip(a.values(), b.values()):
            err = max(err, float(np.max(np.abs(p - q))))
    for p, q in zip(sc.probes.values(), ref.probes.values()):
        err = max(err, float(np.max(np.abs(p - q))))
    return err < 1e-12, f"bell.ws vs built-in {err:.1e}"


def run_checks(seed: int = 2024) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    checks: list[tuple[str, Callable[[], tuple[bool, str]]]] = [
        ("bell-spectra", _bell_spectra),
        ("chsh", _chsh),
        ("double-slit", _double_slit),
        ("mixture-identity", lambda: _mixture(rng)),
        ("entangled-locality", lambda: _locality(rng)),
        ("consistency-chain", lambda: _chain(rng)),
        ("shard-invariance", _shards),
        ("kernel-backends", _backends),
        ("dsl-bell", _dsl),
    ]
    out = []
    for name, fn in checks:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(ok), detail))
    return out

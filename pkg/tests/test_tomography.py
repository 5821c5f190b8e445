import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from weakstat import operators as ops
from weakstat.errors import (
    IncompletePVM,
    InvalidState,
    SingularGram,
    StrengthTooLarge,
    ZeroProbabilityOutcome,
)
from weakstat.tomography import (
    TomographyBasis,
    build_weak_povm,
    check_pvm,
    conditional_probability,
    conditional_state,
    decompose,
    expansion_matrix,
    gell_mann_basis,
    joint_outcome_probability,
    joint_probability,
    outcome_probabilities,
    preparation_probability,
    recombine,
    reconstruct_density,
    reconstruct_expectations,
)

from conftest import random_density, random_hermitian, random_pvm

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(2, 5)
strengths = st.floats(1e-3, 0.5)


@given(dims, strengths)
def test_weak_povm_is_complete_and_positive(d, eps):
    povm = build_weak_povm(gell_mann_basis(d), eps)
    effects = povm.effects()
    assert len(povm) == 2 * (d * d - 1)
    assert np.allclose(sum(effects), np.eye(d), atol=1e-12)
    for e in effects:
        assert np.linalg.eigvalsh(e)[0] >= -1e-12


def test_strength_limits():
    basis = gell_mann_basis(2)
    build_weak_povm(basis, 1.0)
    with pytest.raises(StrengthTooLarge):
        build_weak_povm(basis, 1.01)
    with pytest.raises(StrengthTooLarge):
        build_weak_povm(basis, 0.0)
    # the d=3 diagonal probe has norm 2/sqrt(3)
    with pytest.raises(StrengthTooLarge):
        build_weak_povm(gell_mann_basis(3), 0.9)


def test_basis_validation():
    with pytest.raises(SingularGram):
        TomographyBasis.from_operators(["X", "Y"], [ops.PAULI_X, ops.PAULI_Y])
    with pytest.raises(SingularGram):
        TomographyBasis.from_operators(["X", "Y", "I"], [ops.PAULI_X, ops.PAULI_Y, np.eye(2)])
    with pytest.raises(SingularGram):
        TomographyBasis.from_operators(["X", "Y", "X2"], [ops.PAULI_X, ops.PAULI_Y, 2 * ops.PAULI_X])
    with pytest.raises(ValueError):
        TomographyBasis.from_operators(["X", "X", "Z"], [ops.PAULI_X, ops.PAULI_Y, ops.PAULI_Z])
    b = gell_mann_basis(2)
    assert b.labels == ("I", "X", "Y", "Z")


@given(seeds, dims, strengths)
def test_exact_probabilities_reconstruct_the_state(seed, d, eps):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, d)
    basis = gell_mann_basis(d)
    eps = min(eps, 0.5 / max(np.linalg.norm(s, 2) for s in basis.probes))
    povm = build_weak_povm(basis, eps)
    probs = outcome_probabilities(rho, povm)
    assert np.isclose(probs.sum(), 1.0, atol=1e-12)
    est = reconstruct_expectations(probs, povm)
    for lab, s in zip(basis.probe_labels, basis.probes):
        assert np.isclose(est[lab], np.trace(rho @ s).real, atol=1e-9)
    assert np.allclose(reconstruct_density(est, basis), rho, atol=1e-9)


@given(seeds, dims)
def test_reconstruction_keeps_negative_eigenvalues(seed, d):
    rng = np.random.default_rng(seed)
    h = random_hermitian(rng, d)
    h = h - np.trace(h) / d * np.eye(d) + np.eye(d) / d
    basis = gell_mann_basis(d)
    est = {lab: np.trace(h @ s).real for lab, s in zip(basis.probe_labels, basis.probes)}
    assert np.allclose(reconstruct_density(est, basis), h, atol=1e-10)


@given(seeds, dims)
def test_expansion_matrix_matches_reconstruction(seed, d):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, d)
    basis = gell_mann_basis(d)
    e = np.array([np.trace(rho @ s).real for s in basis.probes])
    r = np.eye(d) / d + expansion_matrix(basis) @ e
    assert np.allclose(r, rho, atol=1e-10)


@given(seeds, dims)
def test_mixture_identity(seed, d):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, d)
    pvm = random_pvm(rng, d)
    states = decompose(rho, pvm)
    assert np.allclose(recombine(states), rho, atol=1e-10)
    for s in states:
        assert np.isclose(np.trace(s.op).real, 1.0, atol=1e-12)
        assert np.allclose(s.op, s.op.conj().T)


@given(seeds, dims)
def test_consistency_chain(seed, d):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, d)
    proj = random_pvm(rng, d)[0]
    phi = random_pvm(rng, d)[1]
    st_ = conditional_state(rho, proj)
    lhs = joint_probability(rho, proj, phi)
    rhs = preparation_probability(rho, proj) * conditional_probability(st_, phi)
    assert abs(lhs - rhs) < 1e-12
    assert abs(joint_probability(rho, proj, phi) - joint_probability(rho, phi, proj)) < 1e-12


@given(seeds, dims, strengths)
def test_joint_outcome_probability_sums_to_final_probability(seed, d, eps):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, d)
    proj = random_pvm(rng, d)[0]
    basis = gell_mann_basis(d)
    eps = min(eps, 0.5 / max(np.linalg.norm(s, 2) for s in basis.probes))
    povm = build_weak_povm(basis, eps)
    total = sum(joint_outcome_probability(rho, e, proj) for e in povm.effects())
    assert np.isclose(total, preparation_probability(rho, proj), atol=1e-12)


def test_double_slit_conditional_state_is_not_positive():
    psi = np.array([1, 1]) / np.sqrt(2)
    rho = ops.projector(psi)
    st_ = conditional_state(rho, np.diag([1, 0]))
    assert np.allclose(st_.op, [[1, 0.5], [0.5, 0]])
    assert not st_.is_positive
    assert np.allclose(st_.eigenvalues(), [(1 - np.sqrt(2)) / 2, (1 + np.sqrt(2)) / 2])


def test_conditional_state_errors():
    rho = np.diag([1.0, 0.0])
    with pytest.raises(ZeroProbabilityOutcome):
        conditional_state(rho, np.diag([0, 1]))
    with pytest.raises(InvalidState):
        conditional_state(rho, np.diag([0.5, 0.5]))
    # zero-probability outcomes are dropped from the decomposition
    states = decompose(rho, [np.diag([1, 0]), np.diag([0, 1])])
    assert [s.outcome for s in states] == [0]


def test_check_pvm():
    with pytest.raises(IncompletePVM):
        check_pvm([np.diag([1, 0])])
    with pytest.raises(IncompletePVM):
        check_pvm([])
    with pytest.raises(IncompletePVM):
        check_pvm([np.diag([1, 0]), np.diag([1, 0]), np.diag([0, 1])])
    check_pvm([np.eye(2)])


def test_quasi_effects_are_accepted():
    pi = (np.eye(2) + ops.PAULI_X + ops.PAULI_Y) / 4
    assert np.linalg.eigvalsh(pi)[0] < 0
    rho = np.eye(2) / 2
    assert np.isclose(joint_probability(rho, np.diag([1, 0]), pi), 0.125)

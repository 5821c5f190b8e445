"""Dense complex operator algebra on small Hilbert spaces.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``. The
``as_*`` validators check the structural invariants of each operator kind
and return a read-only copy, so validated values can be shared freely.

Composite spaces use the convention that subsystem A is the left tensor
factor: basis index ``a * dim_b + b``.
"""

from __future__ import annotations

from typing import Literal, Sequence

import numpy as np

from .errors import DimMismatch, InvalidState, NonSquare, NotHermitian

HERM_TOL = 1e-10
STRUCT_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
for _m in (I2, PAULI_X, PAULI_Y, PAULI_Z):
    _m.setflags(write=False)

Subsystem = Literal["A", "B"]


def _frozen(m: np.ndarray) -> np.ndarray:
    m = np.array(m, dtype=complex, copy=True)
    m.setflags(write=False)
    return m


def as_matrix(m) -> np.ndarray:
    """Coerce to a finite 2-D complex array."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimMismatch(f"expected a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidState("matrix has non-finite entries")
    return arr


def _square(m) -> np.ndarray:
    arr = as_matrix(m)
    if arr.shape[0] != arr.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {arr.shape}")
    return arr


def hermiticity_residue(m) -> float:
    arr = _square(m)
    return float(np.max(np.abs(arr - arr.conj().T)))


def as_hermitian(m, tol: float = HERM_TOL) -> np.ndarray:
    arr = _square(m)
    scale = 1.0 + float(np.max(np.abs(arr)))
    if hermiticity_residue(arr) > tol * scale:
        raise NotHermitian(
            f"matrix is not Hermitian (residue {hermiticity_residue(arr):.3g})"
        )
    return _frozen(arr)


def as_density(m, tol: float = STRUCT_TOL) -> np.ndarray:
    """Validate a density matrix: Hermitian, unit trace, positive semidefinite."""
    arr = as_hermitian(m)
    tr = np.trace(arr)
    if abs(tr - 1.0) > tol:
        raise InvalidState(f"density matrix trace is {tr.real:.12g}, expected 1")
    lam_min = float(np.linalg.eigvalsh(arr)[0])
    if lam_min < -tol:
        raise InvalidState(f"density matrix has negative eigenvalue {lam_min:.3g}")
    return arr


def as_projector(m, tol: float = STRUCT_TOL) -> np.ndarray:
    arr = as_hermitian(m)
    if float(np.max(np.abs(arr @ arr - arr))) > tol:
        raise InvalidState("operator is not idempotent, so not a projector")
    return arr


def as_effect(m, tol: float = STRUCT_TOL) -> np.ndarray:
    arr = as_hermitian(m)
    lam = np.linalg.eigvalsh(arr)
    if lam[0] < -tol or lam[-1] > 1.0 + tol:
        raise InvalidState(
            f"effect eigenvalues must lie in [0, 1], got [{lam[0]:.6g}, {lam[-1]:.6g}]"
        )
    return arr


def as_ket(v, tol: float = STRUCT_TOL) -> np.ndarray:
    arr = np.asarray(v, dtype=complex)
    if arr.ndim != 1 or arr.size < 1:
        raise DimMismatch(f"expected a 1-D amplitude vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidState("ket has non-finite amplitudes")
    norm = float(np.linalg.norm(arr))
    if abs(norm - 1.0) > tol:
        raise InvalidState(f"ket norm is {norm:.12g}, expected 1")
    return _frozen(arr)


def normalize(v) -> np.ndarray:
    arr = np.asarray(v, dtype=complex)
    norm = np.linalg.norm(arr)
    if norm == 0:
        raise InvalidState("cannot normalize the zero vector")
    return arr / norm


def identity(d: int) -> np.ndarray:
    return np.eye(d, dtype=complex)


def adjoint(m) -> np.ndarray:
    return as_matrix(m).conj().T.copy()


def mat_trace(m) -> complex:
    return complex(np.trace(_square(m)))


def matmul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise DimMismatch(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def jordan_product(a, b) -> np.ndarray:
    """Symmetrized product (AB + BA)/2.

    The result is Hermitized explicitly so rounding cannot leave an
    anti-Hermitian residue.
    """
    a, b = _square(a), _square(b)
    if a.shape != b.shape:
        raise DimMismatch(f"operand shapes differ: {a.shape} vs {b.shape}")
    ab = a @ b
    ba = b @ a
    j = 0.5 * (ab + ba)
    return 0.5 * (j + j.conj().T)


def tensor_product(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def partial_trace(m, dim_a: int, dim_b: int, keep: Subsystem = "B") -> np.ndarray:
    """Reduced operator on the kept subsystem of an A⊗B operator."""
    arr = _square(m)
    if dim_a < 1 or dim_b < 1 or arr.shape[0] != dim_a * dim_b:
        raise DimMismatch(
            f"matrix of size {arr.shape[0]} does not factor as {dim_a} x {dim_b}"
        )
    t = arr.reshape(dim_a, dim_b, dim_a, dim_b)
    if keep == "B":
        return np.einsum("abac->bc", t)
    if keep == "A":
        return np.einsum("abcb->ac", t)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def _fix_phase(vecs: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    out = vecs.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        idx = int(np.argmax(np.abs(col) > tol * max(1.0, np.max(np.abs(col)))))
        z = col[idx]
        if z != 0:
            out[:, k] = col * (abs(z) / z)
    return out


def hermitian_eig(h, tol: float = HERM_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian operator.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues ascending and
    eigenvectors as the columns of a unitary matrix. Each eigenvector is
    phased so that its first non-negligible amplitude is real and positive.
    """
    arr = as_hermitian(h, tol)
    vals, vecs = np.linalg.eigh(arr)
    return vals, _fix_phase(vecs)


def eigenvalues(h) -> np.ndarray:
    return np.linalg.eigvalsh(as_hermitian(h))


def outer(u, v) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.ndim != 1 or v.ndim != 1 or u.shape != v.shape:
        raise DimMismatch(f"outer product needs equal-length vectors, got {u.shape}, {v.shape}")
    return np.outer(u, v.conj())


def projector(v) -> np.ndarray:
    return outer(v, v)


def basis_ket(d: int, k: int) -> np.ndarray:
    e = np.zeros(d, dtype=complex)
    e[k] = 1.0
    return e


def maximally_entangled(d: int) -> np.ndarray:
    """|E> = sum_k |k,k> / sqrt(d) on two d-level systems."""
    e = np.zeros(d * d, dtype=complex)
    for k in range(d):
        e[k * d + k] = 1.0
    return e / np.sqrt(d)


def complete_basis(v) -> list[np.ndarray]:
    """Orthonormal basis whose first element is the unit vector ``v``."""
    v = as_ket(v)
    d = v.size
    q, _ = np.linalg.qr(np.column_stack([v, np.eye(d, dtype=complex)]))
    cols = [v.copy()] + [q[:, k].copy() for k in range(1, d)]
    return cols


def is_complete(ops: Sequence[np.ndarray], tol: float = STRUCT_TOL) -> bool:
    total = sum(ops[1:], start=np.array(ops[0], dtype=complex))
    return float(np.max(np.abs(total - np.eye(total.shape[0])))) <= tol


def gell_mann(d: int) -> list[tuple[str, np.ndarray]]:
    """Generalized Gell-Mann matrices: d²−1 traceless Hermitian operators.

    Ordered symmetric pairs, antisymmetric pairs, then diagonals. For d = 2
    this is (X, Y, Z) and those names are used.
    """
    if d < 2:
        raise DimMismatch("Gell-Mann basis needs d >= 2")
    if d == 2:
        return [("X", PAULI_X.copy()), ("Y", PAULI_Y.copy()), ("Z", PAULI_Z.copy())]
    out = []
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = m[k, j] = 1.0
            out.append((f"sym{j}_{k}", m))
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = -1j
            m[k, j] = 1j
            out.append((f"asym{j}_{k}", m))
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -l
        out.append((f"diag{l}", np.diag(diag * np.sqrt(2.0 / (l * (l + 1)))).astype(complex)))
    return out

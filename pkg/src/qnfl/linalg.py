"""Dense complex linear algebra used throughout the package.

Matrices are plain ``complex128`` numpy arrays. :class:`UnitaryOperator`
and :class:`PureState` are thin immutable wrappers that certify unitarity
and normalization once, at construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, ShapeError

UNITARY_TOL = 1e-10
STATE_TOL = 1e-12
HERMITIAN_TOL = 1e-10


def as_matrix(a) -> np.ndarray:
    """Coerce to a finite 2-D complex array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or 0 in m.shape:
        raise ShapeError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DomainError("matrix has non-finite entries")
    return m


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class UnitaryOperator:
    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if m.shape[0] != m.shape[1]:
            raise ShapeError(f"unitary must be square, got {m.shape}")
        err = unitarity_error(m)
        if err > UNITARY_TOL:
            raise DomainError(f"matrix is not unitary: ||U^dag U - 1||_F = {err:.3e}")
        object.__setattr__(self, "matrix", _readonly(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def adjoint(self) -> "UnitaryOperator":
        return UnitaryOperator(self.matrix.conj().T)

    def __matmul__(self, other):
        if isinstance(other, UnitaryOperator):
            return UnitaryOperator(matmul(self.matrix, other.matrix))
        if isinstance(other, PureState):
            return PureState(self.matrix @ other.amplitudes)
        return NotImplemented


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=np.complex128)
        if v.ndim != 1 or v.size == 0:
            raise ShapeError(f"state must be a non-empty vector, got shape {v.shape}")
        norm2 = np.vdot(v, v).real
        if not np.isfinite(norm2) or abs(norm2 - 1.0) > STATE_TOL:
            raise DomainError(f"state is not normalized: <psi|psi> = {norm2!r}")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "amplitudes", v)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @classmethod
    def basis(cls, d: int, k: int) -> "PureState":
        v = np.zeros(d, dtype=np.complex128)
        v[k] = 1.0
        return cls(v)

    @classmethod
    def from_vector(cls, v) -> "PureState":
        """Normalize ``v`` and wrap it."""
        v = np.asarray(v, dtype=np.complex128)
        return cls(v / np.linalg.norm(v))

    def inner(self, other: "PureState") -> complex:
        """``<self|other>``."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True, eq=False)
class HermitianBasis:
    """Hilbert-Schmidt orthonormal Hermitian operator basis of ``d x d`` matrices.

    ``elements`` has shape ``(d*d, d, d)``.
    """

    elements: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.elements, dtype=np.complex128)
        if e.ndim != 3 or e.shape[1] != e.shape[2] or e.shape[0] != e.shape[1] ** 2:
            raise ShapeError(f"basis must have shape (d^2, d, d), got {e.shape}")
        if np.max(np.abs(e - e.conj().transpose(0, 2, 1))) > 1e-12:
            raise DomainError("basis elements must be Hermitian")
        gram = np.einsum("aij,bji->ab", e, e)
        if np.max(np.abs(gram - np.eye(e.shape[0]))) > 1e-10:
            raise DomainError("basis is not Hilbert-Schmidt orthonormal")
        e = e.copy()
        e.flags.writeable = False
        object.__setattr__(self, "elements", e)

    @property
    def dim(self) -> int:
        return self.elements.shape[1]

    def __len__(self) -> int:
        return self.elements.shape[0]

    def combine(self, coeffs) -> np.ndarray:
        """``sum_a coeffs[a] * elements[a]``; trailing axis of ``coeffs`` is the basis index."""
        return np.tensordot(np.asarray(coeffs, dtype=float), self.elements, axes=(-1, 0))


def unitarity_error(m: np.ndarray) -> float:
    m = np.asarray(m)
    return float(np.linalg.norm(m.conj().T @ m - np.eye(m.shape[0])))


def matmul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def adjoint(a) -> np.ndarray:
    return as_matrix(a).conj().T


def trace(a) -> complex:
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"trace needs a square matrix, got {a.shape}")
    return complex(np.trace(a))


def is_hermitian(h, tol: float = HERMITIAN_TOL) -> bool:
    h = np.asarray(h)
    return h.shape[-1] == h.shape[-2] and bool(np.max(np.abs(h - np.swapaxes(h, -1, -2).conj())) <= tol)


def expm_hermitian_batch(h: np.ndarray) -> np.ndarray:
    """``exp(i h)`` for a stack of Hermitian matrices, shape ``(..., d, d)``.

    No validation; callers guarantee Hermiticity.
    """
    h = 0.5 * (h + np.swapaxes(h, -1, -2).conj())
    evals, evecs = np.linalg.eigh(h)
    phases = np.exp(1j * evals)
    return (evecs * phases[..., None, :]) @ np.swapaxes(evecs, -1, -2).conj()


def expm_hermitian(h) -> UnitaryOperator:
    """Unitary ``exp(i h)`` for Hermitian ``h`` via its eigendecomposition."""
    h = as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise ShapeError(f"generator must be square, got {h.shape}")
    if not is_hermitian(h):
        raise DomainError("expm_hermitian requires a Hermitian generator")
    return UnitaryOperator(expm_hermitian_batch(h))


def orthonormalize(
    vectors: Sequence[PureState], tol: float = 1e-10
) -> tuple[list[PureState], int]:
    """Orthonormal basis of ``span(vectors)`` by modified Gram-Schmidt.

    Each candidate is projected out twice against the basis built so far
    (re-orthogonalization). Candidates whose residual norm falls below
    ``tol`` are dropped as linearly dependent.
    """
    if not 0 < tol < 1:
        raise DomainError(f"tol must lie in (0, 1), got {tol}")
    vectors = list(vectors)
    if not vectors:
        return [], 0
    d = vectors[0].dim
    if any(v.dim != d for v in vectors):
        raise ShapeError("all vectors must share a dimension")

    basis: list[np.ndarray] = []
    for v in vectors:
        r = np.array(v.amplitudes, dtype=np.complex128)
        for _ in range(2):
            for q in basis:
                r -= np.vdot(q, r) * q
        norm = np.linalg.norm(r)
        if norm < tol:
            continue
        basis.append(r / norm)
    states = [PureState.from_vector(q) for q in basis]
    return states, len(states)


def residual_norms(vectors: Sequence[PureState]) -> list[float]:
    """Norm of each vector's component orthogonal to the span of its predecessors."""
    out = []
    basis: list[np.ndarray] = []
    for v in vectors:
        r = np.array(v.amplitudes, dtype=np.complex128)
        for _ in range(2):
            for q in basis:
                r -= np.vdot(q, r) * q
        norm = float(np.linalg.norm(r))
        out.append(norm)
        if norm > 0:
            basis.append(r / norm)
    return out


def extend_to_full_basis(basis: Sequence[PureState], d: int) -> list[PureState]:
    """Complete an orthonormal set to an orthonormal basis of C^d.

    The leading entries are the input vectors unchanged; the completion comes
    from orthonormalizing the standard basis vectors against them.
    """
    basis = list(basis)
    if len(basis) > d:
        raise DomainError(f"{len(basis)} vectors cannot be orthonormal in dimension {d}")
    if any(b.dim != d for b in basis):
        raise ShapeError("basis vectors must have dimension d")
    out = list(basis)
    q = basis_matrix(basis) if basis else np.zeros((d, 0), dtype=np.complex128)
    while len(out) < d:
        # Project every standard vector off the current span and keep the
        # best-conditioned candidate.
        r = np.eye(d, dtype=np.complex128)
        for _ in range(2):
            r = r - q @ (q.conj().T @ r)
        norms = np.linalg.norm(r, axis=0)
        k = int(np.argmax(norms))
        if norms[k] < 1e-6:
            break
        col = r[:, k] / norms[k]
        q = np.column_stack([q, col])
        out.append(PureState.from_vector(col))
    if len(out) != d:
        raise DomainError("failed to complete basis; input is not orthonormal")
    return out


def basis_matrix(states: Sequence[PureState]) -> np.ndarray:
    """Matrix whose columns are the given states."""
    return np.stack([s.amplitudes for s in states], axis=1)


def gell_mann_basis(d: int) -> HermitianBasis:
    """Normalized generalized Gell-Mann basis, identity element first.

    Order: ``1/sqrt(d)``, then for each ``j < k`` the symmetric
    ``(E_jk + E_kj)/sqrt(2)`` and antisymmetric ``-i(E_jk - E_kj)/sqrt(2)``
    pair, then the ``d - 1`` traceless diagonal elements.
    """
    if d < 2:
        raise DomainError(f"Gell-Mann basis needs d >= 2, got {d}")
    elems = [np.eye(d, dtype=np.complex128) / np.sqrt(d)]
    for j in range(d):
        for k in range(j + 1, d):
            s = np.zeros((d, d), dtype=np.complex128)
            s[j, k] = s[k, j] = 1 / np.sqrt(2)
            a = np.zeros((d, d), dtype=np.complex128)
            a[j, k] = -1j / np.sqrt(2)
            a[k, j] = 1j / np.sqrt(2)
            elems += [s, a]
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -l
        elems.append(np.diag(diag / np.sqrt(l * (l + 1))).astype(np.complex128))
    return HermitianBasis(np.array(elems))


def swap_operator(d: int) -> np.ndarray:
    """SWAP on C^d (x) C^d."""
    s = np.zeros((d * d, d * d), dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            s[j * d + i, i * d + j] = 1.0
    return s

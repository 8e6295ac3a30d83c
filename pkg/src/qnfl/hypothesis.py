"""Training sets drawn from a hidden unitary and the optimal block hypothesis.

A hypothesis that reproduces every training pair must agree with the target
on the span of the training inputs. In a basis adapted to that span the
product ``U^dag V`` is ``1_m (+) W`` with ``W`` an arbitrary unitary on the
orthogonal complement, and the best a learner can do is guess ``W``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .errors import DomainError, ShapeError
from .haar import haar_states, haar_unitaries
from .linalg import (
    PureState,
    UnitaryOperator,
    basis_matrix,
    extend_to_full_basis,
    orthonormalize,
    residual_norms,
)
from .rng import RngStream, as_generator

REALIZABLE_TOL = 1e-10
RANK_TOL = 1e-8
OPTIMAL_REPRODUCTION_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class TrainingSet:
    pairs: tuple[tuple[PureState, PureState], ...]
    rank: int = field(init=False)

    def __post_init__(self):
        pairs = tuple((a, b) for a, b in self.pairs)
        if not pairs:
            raise DomainError("a training set needs at least one pair")
        d = pairs[0][0].dim
        if any(a.dim != d or b.dim != d for a, b in pairs):
            raise ShapeError("all training states must share one dimension")
        if len(pairs) > d:
            raise DomainError(f"{len(pairs)} pairs exceed dimension {d}")
        phi = self._stack(pairs, 0)
        psi = self._stack(pairs, 1)
        gap = np.max(np.abs(phi.conj() @ phi.T - psi.conj() @ psi.T))
        if gap > REALIZABLE_TOL:
            raise DomainError(f"training pairs are not realizable by a unitary (Gram mismatch {gap:.2e})")
        _, rank = orthonormalize([a for a, _ in pairs], tol=RANK_TOL)
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "rank", rank)

    @staticmethod
    def _stack(pairs, k) -> np.ndarray:
        return np.stack([p[k].amplitudes for p in pairs])

    @property
    def dim(self) -> int:
        return self.pairs[0][0].dim

    @property
    def inputs(self) -> np.ndarray:
        """Input states as rows, shape ``(n, d)``."""
        return self._stack(self.pairs, 0)

    @property
    def outputs(self) -> np.ndarray:
        return self._stack(self.pairs, 1)

    def __len__(self) -> int:
        return len(self.pairs)

    @classmethod
    def from_arrays(cls, inputs, outputs) -> "TrainingSet":
        return cls(tuple((PureState(a), PureState(b)) for a, b in zip(inputs, outputs)))


@dataclass(frozen=True, eq=False)
class Hypothesis:
    kind: Literal["optimal_block", "variational"]
    unitary: UnitaryOperator
    metadata: dict = field(default_factory=dict)


def realize_training_set(
    u: UnitaryOperator, n: int, rng: RngStream | np.random.Generator
) -> TrainingSet:
    """``n`` Haar-random inputs and their exact images under ``u``.

    Inputs that are numerically dependent on earlier ones are redrawn, so the
    returned set always has rank ``n``.
    """
    d = u.dim
    if not 1 <= n <= d:
        raise DomainError(f"number of pairs n={n} must lie in [1, d={d}]")
    gen = as_generator(rng)
    inputs: list[PureState] = []
    while len(inputs) < n:
        cand = PureState(haar_states(d, 1, gen)[0])
        if residual_norms(inputs + [cand])[-1] < RANK_TOL:
            continue
        inputs.append(cand)
    return TrainingSet(tuple((phi, u @ phi) for phi in inputs))


def adapted_basis(training: TrainingSet, completion: str = "standard") -> np.ndarray:
    """Unitary whose first ``rank`` columns span the training inputs.

    ``completion`` picks how the orthogonal complement is filled:
    ``"standard"`` orthonormalizes standard basis vectors against the span,
    ``"qr"`` takes the trailing columns of a full QR factorization.
    """
    span, m = orthonormalize([a for a, _ in training.pairs], tol=RANK_TOL)
    d = training.dim
    if completion == "standard":
        return basis_matrix(extend_to_full_basis(span, d))
    if completion == "qr":
        if m == 0:
            return np.eye(d, dtype=np.complex128)
        head = basis_matrix(span)
        q, _ = np.linalg.qr(head, mode="complete")
        return np.column_stack([head, q[:, m:]])
    raise ValueError(f"unknown completion {completion!r}")


def check_consistent(u: UnitaryOperator, training: TrainingSet, tol: float = REALIZABLE_TOL):
    if u.dim != training.dim:
        raise ShapeError("reference unitary and training set differ in dimension")
    err = np.max(np.linalg.norm(training.inputs @ u.matrix.T - training.outputs, axis=1))
    if err > tol:
        raise DomainError(f"reference unitary does not realize the training set (error {err:.2e})")


def optimal_hypothesis(
    training: TrainingSet,
    u_reference: UnitaryOperator,
    rng: RngStream | np.random.Generator,
    completion: str = "standard",
) -> Hypothesis:
    """``V = U E (1_m (+) W) E^dag`` with ``W`` Haar on the complement.

    ``E`` is the adapted basis from :func:`adapted_basis`. The drawn ``W`` is
    kept in the metadata as ``residual_block``.
    """
    check_consistent(u_reference, training)
    d, m = training.dim, training.rank
    e = adapted_basis(training, completion)
    block = np.eye(d, dtype=np.complex128)
    w = np.zeros((0, 0), dtype=np.complex128)
    if m < d:
        w = haar_unitaries(d - m, 1, as_generator(rng))[0]
        block[m:, m:] = w
    v = u_reference.matrix @ e @ block @ e.conj().T
    hyp = Hypothesis("optimal_block", UnitaryOperator(v), {"residual_block": w, "basis": e})
    err = reproduction_error(hyp.unitary, training)
    if err > OPTIMAL_REPRODUCTION_TOL:
        raise AssertionError(f"optimal hypothesis misses training pairs by {err:.2e}")
    return hyp


def reproduction_error(v: UnitaryOperator, training: TrainingSet) -> float:
    """``max_j ||V|phi_j> - |psi_j>||``."""
    return float(np.max(np.linalg.norm(training.inputs @ v.matrix.T - training.outputs, axis=1)))


def block_residuals(
    u: UnitaryOperator, v: UnitaryOperator, training: TrainingSet, basis: np.ndarray | None = None
) -> tuple[float, float]:
    """Frobenius residuals of ``U^dag V`` against ``1_m (+) *`` in the adapted basis.

    Returns ``(||top_left - 1_m||, ||[A, B]||)`` where ``A`` and ``B`` are the
    off-diagonal blocks.
    """
    e = adapted_basis(training) if basis is None else basis
    m = training.rank
    g = e.conj().T @ u.matrix.conj().T @ v.matrix @ e
    ident = float(np.linalg.norm(g[:m, :m] - np.eye(m)))
    off = float(np.sqrt(np.linalg.norm(g[:m, m:]) ** 2 + np.linalg.norm(g[m:, :m]) ** 2))
    return ident, off


def residual_block(u: UnitaryOperator, v: UnitaryOperator, training: TrainingSet, basis: np.ndarray | None = None) -> np.ndarray:
    """Bottom-right ``(d-m) x (d-m)`` block of ``U^dag V`` in the adapted basis."""
    e = adapted_basis(training) if basis is None else basis
    m = training.rank
    g = e.conj().T @ u.matrix.conj().T @ v.matrix @ e
    return g[m:, m:]

"""Variational learner: fits ``V(theta) = exp(i sum_a theta_a lambda_a)`` to training pairs.

The learner only sees the training pairs. It maximizes the mean squared
overlap between ``V|phi_j>`` and ``|psi_j>`` by gradient ascent with central
finite-difference gradients, backtracking, and random restarts.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShapeError
from .hypothesis import Hypothesis, TrainingSet, reproduction_error
from .linalg import HermitianBasis, UnitaryOperator, expm_hermitian_batch
from .rng import RngStream, as_generator

log = logging.getLogger(__name__)

PLATEAU_GRAD_NORM = 1e-9
MAX_BACKTRACKS = 30


@dataclass(frozen=True)
class VariationalParams:
    theta: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        d = int(round(np.sqrt(theta.size)))
        if theta.ndim != 1 or d * d != theta.size or d < 1:
            raise ShapeError(f"theta must have length d^2, got shape {theta.shape}")
        if not np.all(np.isfinite(theta)):
            raise DomainError("theta has non-finite entries")
        object.__setattr__(self, "theta", theta)

    @property
    def dim(self) -> int:
        return int(round(np.sqrt(self.theta.size)))


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    max_iters: int = 50_000
    target_cost: float = 1 - 1e-6
    fd_step: float = 1e-5
    restarts: int = 5
    init_scale: float = 0.1

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise DomainError("learning_rate must be positive")
        if self.max_iters < 1:
            raise DomainError("max_iters must be >= 1")
        if not 0 < self.target_cost <= 1:
            raise DomainError("target_cost must lie in (0, 1]")
        if not 1e-8 <= self.fd_step <= 1e-3:
            raise DomainError("fd_step must lie in [1e-8, 1e-3]")
        if self.restarts < 1:
            raise DomainError("restarts must be >= 1")
        if self.init_scale < 0:
            raise DomainError("init_scale must be non-negative")


def _unitaries(thetas: np.ndarray, basis: HermitianBasis) -> np.ndarray:
    return expm_hermitian_batch(basis.combine(thetas))


def params_to_unitary(p: VariationalParams, basis: HermitianBasis) -> UnitaryOperator:
    if p.dim != basis.dim:
        raise ShapeError(f"parameter dimension {p.dim} does not match basis dimension {basis.dim}")
    return UnitaryOperator(_unitaries(p.theta, basis))


def unitary_to_params(u: UnitaryOperator, basis: HermitianBasis) -> VariationalParams:
    """Parameters of a generator ``H`` with ``exp(iH) = u`` (principal branch)."""
    evals, evecs = np.linalg.eig(u.matrix)
    # Eigenvectors of a unitary with distinct eigenvalues are orthogonal;
    # re-orthonormalize to absorb degeneracies.
    q, _ = np.linalg.qr(evecs)
    phases = np.angle(np.diag(q.conj().T @ u.matrix @ q))
    h = (q * phases) @ q.conj().T
    return VariationalParams(np.real(np.einsum("aij,ji->a", basis.elements, h)))


def _batch_cost(us: np.ndarray, training: TrainingSet) -> np.ndarray:
    overlaps = np.einsum("jd,...de,je->...j", training.outputs.conj(), us, training.inputs)
    return np.mean(np.abs(overlaps) ** 2, axis=-1)


def cost(v: UnitaryOperator, training: TrainingSet) -> float:
    """Mean over pairs of ``|<psi_j|V|phi_j>|^2``."""
    if v.dim != training.dim:
        raise ShapeError(f"hypothesis dimension {v.dim} does not match training dimension {training.dim}")
    return float(_batch_cost(v.matrix, training))


def _theta_cost(theta: np.ndarray, training: TrainingSet, basis: HermitianBasis) -> np.ndarray:
    return _batch_cost(_unitaries(theta, basis), training)


def gradient_fd(
    p: VariationalParams, training: TrainingSet, basis: HermitianBasis, step: float = 1e-5
) -> np.ndarray:
    """Central finite-difference gradient of the cost with respect to ``theta``.

    All ``2 d^2`` shifted evaluations go through one batched eigensolve.
    """
    if not 1e-8 <= step <= 1e-3:
        raise DomainError(f"finite-difference step must lie in [1e-8, 1e-3], got {step}")
    if p.dim != basis.dim or p.dim != training.dim:
        raise ShapeError("parameters, basis and training set must share a dimension")
    k = p.theta.size
    shifts = np.eye(k) * step
    thetas = np.concatenate([p.theta + shifts, p.theta - shifts])
    c = _theta_cost(thetas, training, basis)
    return (c[:k] - c[k:]) / (2 * step)


def align_global_phase(v: np.ndarray, training: TrainingSet) -> np.ndarray:
    """Multiply ``v`` by the phase making ``sum_j <psi_j|V|phi_j>`` real and positive.

    Uses only the training pairs. A global phase leaves cost and risk unchanged
    but lets ``V`` reproduce the outputs as vectors, not just as rays.
    """
    s = np.einsum("jd,de,je->", training.outputs.conj(), v, training.inputs)
    if abs(s) == 0:
        return v
    return v * (np.conj(s) / abs(s))


def train(
    training: TrainingSet,
    config: TrainConfig,
    basis: HermitianBasis,
    rng: RngStream | np.random.Generator,
) -> Hypothesis:
    """Gradient ascent on the training cost with backtracking and restarts.

    Never raises on non-convergence: the best hypothesis found is returned and
    ``metadata["reached_target"]`` records whether it met ``target_cost``.
    """
    if basis.dim != training.dim:
        raise ShapeError("basis and training set must share a dimension")
    gen = as_generator(rng)
    k = basis.dim**2

    best_theta = np.zeros(k)
    best_cost = -np.inf
    best_trace: list[float] = []
    total_iters = 0
    restarts_used = 0

    for restart in range(config.restarts):
        restarts_used = restart + 1
        theta = gen.standard_normal(k) * config.init_scale
        c = float(_theta_cost(theta, training, basis))
        for _ in range(config.max_iters):
            if c > best_cost:
                best_cost, best_theta = c, theta
            best_trace.append(best_cost)
            if c >= config.target_cost:
                break
            g = gradient_fd(VariationalParams(theta), training, basis, config.fd_step)
            if np.linalg.norm(g) < PLATEAU_GRAD_NORM:
                break
            total_iters += 1
            lr = config.learning_rate
            for _ in range(MAX_BACKTRACKS):
                cand = theta + lr * g
                c_new = float(_theta_cost(cand, training, basis))
                if c_new >= c:
                    break
                lr *= 0.5
            else:
                break
            theta, c = cand, c_new
        if c > best_cost:
            best_cost, best_theta = c, theta
            best_trace.append(best_cost)
        if best_cost >= config.target_cost:
            break
        log.debug("restart %d ended at cost %.3e", restart, c)

    v = UnitaryOperator(align_global_phase(_unitaries(best_theta, basis), training))
    return Hypothesis(
        "variational",
        v,
        {
            "reproduction_error": reproduction_error(v, training),
            "cost": best_cost,
            "iterations": total_iters,
            "restarts": restarts_used,
            "reached_target": bool(best_cost >= config.target_cost),
            "theta": best_theta,
            "best_trace": best_trace,
        },
    )

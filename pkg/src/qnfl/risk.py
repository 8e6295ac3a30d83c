"""Quantum risk of a unitary hypothesis and the averaged no-free-lunch bound."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DomainError, ShapeError
from .haar import haar_states
from .linalg import UnitaryOperator
from .rng import RngStream, as_generator

RiskMethod = Literal["closed_form", "mc_fidelity", "mc_tracenorm"]


@dataclass(frozen=True)
class RiskEstimate:
    mean: float
    std_error: float
    samples: int
    method: RiskMethod
    per_sample: np.ndarray | None = None

    def __post_init__(self):
        if self.std_error < 0:
            raise ValueError("std_error must be non-negative")
        if self.method == "closed_form" and (self.std_error != 0 or self.samples != 1):
            raise ValueError("closed-form estimates are exact: std_error 0, one sample")
        margin = 3 * self.std_error + 1e-12
        if not -margin <= self.mean <= 1 + margin:
            raise ValueError(f"risk {self.mean} outside [0, 1]")


@dataclass(frozen=True)
class BoundValue:
    d: int
    n: int
    raw: float
    clamped: float


def _check_pair(u: UnitaryOperator, v: UnitaryOperator) -> int:
    if u.dim != v.dim:
        raise ShapeError(f"hypothesis dimension {v.dim} does not match target {u.dim}")
    return u.dim


def risk_from_trace(d: int, tr_abs2: float) -> float:
    """``1 - (d + |tr(U^dag V)|^2) / (d(d+1))``."""
    return 1.0 - (d + tr_abs2) / (d * (d + 1))


def risk_closed_form(u: UnitaryOperator, v: UnitaryOperator) -> RiskEstimate:
    d = _check_pair(u, v)
    tr = np.vdot(u.matrix, v.matrix)  # tr(U^dag V)
    # |tr|^2 <= d^2 up to rounding; clamp the rounding residue at v = u.
    risk = max(risk_from_trace(d, abs(tr) ** 2), 0.0)
    return RiskEstimate(risk, 0.0, 1, "closed_form")


def _summarize(values: np.ndarray, method: RiskMethod) -> RiskEstimate:
    n = values.size
    return RiskEstimate(
        float(values.mean()),
        float(values.std(ddof=1) / np.sqrt(n)),
        n,
        method,
        per_sample=values,
    )


def _check_samples(n_samples: int):
    if n_samples < 100:
        raise DomainError(f"need at least 100 samples, got {n_samples}")


def fidelity_losses(u: UnitaryOperator, v: UnitaryOperator, states: np.ndarray) -> np.ndarray:
    """``1 - |<psi|U^dag V|psi>|^2`` for each row ``psi`` of ``states``."""
    w = u.matrix.conj().T @ v.matrix
    overlap = np.einsum("ni,ij,nj->n", states.conj(), w, states)
    return np.clip(1.0 - np.abs(overlap) ** 2, 0.0, 1.0)


def risk_mc_fidelity(
    u: UnitaryOperator, v: UnitaryOperator, n_samples: int, rng: RngStream | np.random.Generator
) -> RiskEstimate:
    """Average of ``1 - |<psi|U^dag V|psi>|^2`` over Haar-random inputs."""
    d = _check_pair(u, v)
    _check_samples(n_samples)
    states = haar_states(d, n_samples, as_generator(rng))
    return _summarize(fidelity_losses(u, v, states), "mc_fidelity")


def trace_distance_pure(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Trace distance ``1/2 tr|aa^dag - bb^dag|`` between rows of ``a`` and ``b``.

    The difference of two pure projectors has rank at most two with
    eigenvalues ``+-sqrt(1 - |<a|b>|^2)``, so the half trace norm is that root.
    """
    overlap2 = np.abs(np.einsum("ni,ni->n", a.conj(), b)) ** 2
    return np.sqrt(np.clip(1.0 - overlap2, 0.0, 1.0))


def trace_distance_dense(a: np.ndarray, b: np.ndarray) -> float:
    """Half trace norm of ``|a><a| - |b><b|`` from the full spectrum (debug path)."""
    diff = np.outer(a, a.conj()) - np.outer(b, b.conj())
    return 0.5 * float(np.abs(np.linalg.eigvalsh(diff)).sum())


def risk_mc_tracenorm(
    u: UnitaryOperator,
    v: UnitaryOperator,
    n_samples: int,
    rng: RngStream | np.random.Generator,
    check_dense: bool = False,
) -> RiskEstimate:
    """Average squared trace distance between ``U|psi>`` and ``V|psi>``.

    With ``check_dense`` every sample is also evaluated from the full
    eigendecomposition and compared to the closed 2x2 formula.
    """
    d = _check_pair(u, v)
    _check_samples(n_samples)
    states = haar_states(d, n_samples, as_generator(rng))
    out_u = states @ u.matrix.T
    out_v = states @ v.matrix.T
    dist = trace_distance_pure(out_u, out_v)
    if check_dense:
        dense = np.array([trace_distance_dense(a, b) for a, b in zip(out_u, out_v)])
        assert np.max(np.abs(dense - dist)) < 1e-8, "trace-norm closed form disagrees with eigensolver"
    return _summarize(dist**2, "mc_tracenorm")


def quantum_nfl_bound(d: int, n: int) -> BoundValue:
    """Lower bound on the risk averaged over Haar targets and ``n``-pair training sets."""
    if d < 1:
        raise DomainError(f"dimension must be >= 1, got {d}")
    if not 0 <= n <= d:
        raise DomainError(f"training rank n={n} must lie in [0, d={d}]")
    raw = 1.0 - (n * n + d + 1) / (d * (d + 1))
    return BoundValue(d, n, raw, max(0.0, raw))

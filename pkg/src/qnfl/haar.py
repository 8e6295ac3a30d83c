"""Haar-random unitaries and states, and Monte Carlo checks of Haar moment identities."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ResourceError
from .linalg import PureState, UnitaryOperator, swap_operator
from .rng import RngStream, as_generator

MAX_S4_DIM = 6
_CHUNK = 4096


@dataclass(frozen=True)
class MomentEstimate:
    value: complex | float
    std_error: float
    samples: int

    def __post_init__(self):
        if self.std_error < 0:
            raise ValueError("std_error must be non-negative")
        if self.samples < 2:
            raise ValueError("a moment estimate needs at least two samples")


def ginibre(d: int, size: int, gen: np.random.Generator) -> np.ndarray:
    """``size`` matrices of i.i.d. standard complex Gaussians, shape ``(size, d, d)``."""
    z = gen.standard_normal((size, d, d, 2))
    return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2)


def haar_unitaries(d: int, size: int, rng: RngStream | np.random.Generator) -> np.ndarray:
    """Stack of ``size`` Haar-random ``d x d`` unitaries.

    QR of a Ginibre matrix, with each column of Q multiplied by the phase of
    the matching diagonal entry of R. Without that correction the result is
    biased by LAPACK's sign convention.
    """
    if d < 1:
        raise DomainError(f"dimension must be >= 1, got {d}")
    gen = as_generator(rng)
    q, r = np.linalg.qr(ginibre(d, size, gen))
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    phases = diag / np.abs(diag)
    return q * phases[..., None, :]


def sample_haar_unitary(d: int, rng: RngStream | np.random.Generator) -> UnitaryOperator:
    return UnitaryOperator(haar_unitaries(d, 1, rng)[0])


def haar_states(d: int, size: int, rng: RngStream | np.random.Generator) -> np.ndarray:
    """Stack of ``size`` Haar-random unit vectors, shape ``(size, d)``."""
    if d < 1:
        raise DomainError(f"dimension must be >= 1, got {d}")
    gen = as_generator(rng)
    z = gen.standard_normal((size, d, 2))
    v = z[..., 0] + 1j * z[..., 1]
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def sample_haar_state(d: int, rng: RngStream | np.random.Generator) -> PureState:
    return PureState(haar_states(d, 1, rng)[0])


def _chunks(total: int, size: int = _CHUNK):
    done = 0
    while done < total:
        step = min(size, total - done)
        yield step
        done += step


def _check_samples(n_samples: int):
    if n_samples < 100:
        raise DomainError(f"need at least 100 samples, got {n_samples}")


def _s2_sum(d: int, n_samples: int, gen: np.random.Generator) -> np.ndarray:
    acc = np.zeros((d * d, d * d), dtype=np.complex128)
    for step in _chunks(n_samples):
        u = haar_unitaries(d, step, gen)
        udag = np.swapaxes(u, -1, -2).conj()
        acc += np.einsum("nab,ncd->acbd", udag, u).reshape(d * d, d * d)
    return acc


def estimate_S2(d: int, n_samples: int, rng: RngStream | np.random.Generator) -> np.ndarray:
    """Empirical mean of ``U^dag (x) U`` over Haar draws."""
    _check_samples(n_samples)
    return _s2_sum(d, n_samples, as_generator(rng)) / n_samples


def estimate_S4(d: int, n_samples: int, rng: RngStream | np.random.Generator) -> np.ndarray:
    """Empirical mean of ``U^dag (x) U^dag (x) U (x) U`` over Haar draws."""
    if d < 2:
        raise DomainError(f"S4 estimate needs d >= 2, got {d}")
    if d > MAX_S4_DIM:
        raise ResourceError(f"S4 is materialized densely only for d <= {MAX_S4_DIM}, got {d}")
    _check_samples(n_samples)
    gen = as_generator(rng)
    D = d**4
    acc = np.zeros((D, D), dtype=np.complex128)
    for step in _chunks(n_samples, max(1, min(_CHUNK, 2**22 // D))):
        u = haar_unitaries(d, step, gen)
        udag = np.swapaxes(u, -1, -2).conj()
        t = np.einsum("nab,ncd->nacbd", udag, udag).reshape(step, d * d, d * d)
        v = np.einsum("nab,ncd->nacbd", u, u).reshape(step, d * d, d * d)
        acc += np.einsum("nab,ncd->acbd", t, v).reshape(D, D)
    return acc / n_samples


def permutation_operator(perm: tuple[int, ...], d: int) -> np.ndarray:
    """Operator on ``(C^d)^{(x) k}`` routing input slot ``perm[j]`` to output slot ``j``.

    Matrix elements are ``<a_1..a_k| P |b_1..b_k> = prod_j delta(a_j, b_perm[j])``.
    """
    k = len(perm)
    D = d**k
    p = np.zeros((D, D), dtype=np.complex128)
    for b in itertools.product(range(d), repeat=k):
        a = tuple(b[perm[j]] for j in range(k))
        p[np.ravel_multi_index(a, (d,) * k), np.ravel_multi_index(b, (d,) * k)] = 1.0
    return p


def s4_wirings() -> list[tuple[tuple[int, ...], int]]:
    """The four slot permutations making up S4, each with its Weingarten class.

    Slots are ordered ``(U^dag, U^dag, U, U)``. Each adjoint slot is wired to a
    plain slot and back; ``sigma`` routes plain outputs, ``tau`` the plain
    inputs. The coefficient depends only on whether ``sigma`` and ``tau``
    agree (class 0) or differ by a transposition (class 1).
    """
    out = []
    for sigma in itertools.permutations((0, 1)):
        for tau in itertools.permutations((0, 1)):
            perm = [0, 0, 0, 0]
            # output slot 2+k <- input slot sigma[k]
            perm[2] = sigma[0]
            perm[3] = sigma[1]
            # input slot 2+k -> output slot tau[k]
            perm[tau[0]] = 2
            perm[tau[1]] = 3
            out.append((tuple(perm), int(sigma != tau)))
    return out


def weingarten_2(d: int) -> tuple[float, float]:
    """Second-order unitary Weingarten values: identity class, transposition class."""
    return 1.0 / (d * d - 1), -1.0 / (d * (d * d - 1))


def analytic_S4(d: int) -> np.ndarray:
    """Closed form of ``E[U^dag (x) U^dag (x) U (x) U]``.

    Two wirings carry ``1/(d^2-1)`` and two carry ``-1/(d(d^2-1))``.
    """
    if d < 2:
        raise DomainError(f"analytic S4 has a pole at d = 1; need d >= 2, got {d}")
    if d > MAX_S4_DIM:
        raise ResourceError(f"S4 is materialized densely only for d <= {MAX_S4_DIM}, got {d}")
    wg = weingarten_2(d)
    return sum(wg[cls] * permutation_operator(perm, d) for perm, cls in s4_wirings())


def moment_M(d: int) -> np.ndarray:
    """``M = 1 + SWAP/d`` on C^d (x) C^d."""
    return np.eye(d * d) + swap_operator(d) / d


def moment_M_inverse(d: int) -> np.ndarray:
    """Closed-form inverse ``d^2/(d^2-1) 1 - d/(d^2-1) SWAP`` of :func:`moment_M`."""
    if d < 2:
        raise DomainError("M is singular at d = 1")
    return (d * d * np.eye(d * d) - d * swap_operator(d)) / (d * d - 1)


def conjugated_overlap_moment(s4: np.ndarray, x: np.ndarray) -> float:
    """``E |<0|U^dag X U|0>|^2`` computed by contracting a fourth-moment operator.

    Uses ``<0|U^dag X^dag U|0><0|U^dag X U|0> =
    sum X^dag_{ij} X_{kl} (S4)_{(0,0,j,l),(i,k,0,0)}``.
    """
    d = x.shape[0]
    t = s4.reshape((d,) * 8)
    xdag = x.conj().T
    val = np.einsum("ij,kl,jlik->", xdag, x, t[0, 0, :, :, :, :, 0, 0])
    return float(val.real)


def trace_moments(d: int, n_samples: int, rng: RngStream | np.random.Generator) -> dict[str, MomentEstimate]:
    """Monte Carlo estimates of ``E[tr U]``, ``E|tr U|^2`` and ``E|tr U|^4``."""
    _check_samples(n_samples)
    gen = as_generator(rng)
    tr = np.concatenate(
        [np.trace(haar_unitaries(d, step, gen), axis1=-2, axis2=-1) for step in _chunks(n_samples)]
    )
    sq = np.abs(tr) ** 2
    rt = np.sqrt(n_samples)
    return {
        "tr": MomentEstimate(complex(tr.mean()), float(np.std(tr, ddof=1) / rt), n_samples),
        "abs2": MomentEstimate(float(sq.mean()), float(np.std(sq, ddof=1) / rt), n_samples),
        "abs4": MomentEstimate(float((sq**2).mean()), float(np.std(sq**2, ddof=1) / rt), n_samples),
    }


def invariance_check(
    d: int, fixed_v: UnitaryOperator, n_samples: int, rng: RngStream | np.random.Generator
) -> float:
    """Frobenius distance between empirical means of ``(UV)^dag (x) UV`` and ``U^dag (x) U``.

    The two means use independent draws; both estimate ``SWAP/d`` for a
    right-invariant sampler.
    """
    if fixed_v.dim != d:
        raise DomainError(f"fixed_v has dimension {fixed_v.dim}, expected {d}")
    _check_samples(n_samples)
    gen = as_generator(rng)
    v = fixed_v.matrix
    acc_uv = np.zeros((d * d, d * d), dtype=np.complex128)
    for step in _chunks(n_samples):
        uv = haar_unitaries(d, step, gen) @ v
        acc_uv += np.einsum("nab,ncd->acbd", np.swapaxes(uv, -1, -2).conj(), uv).reshape(d * d, d * d)
    acc_u = _s2_sum(d, n_samples, gen)
    return float(np.linalg.norm((acc_uv - acc_u) / n_samples))


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tolerance: float
    passed: bool
    detail: str = ""


def verify_haar(d: int, n_samples: int, seed: int) -> list[CheckResult]:
    """Monte Carlo checks of the second- and fourth-moment Haar identities at dimension ``d``.

    Scalar moments use a ``5/sqrt(N)`` budget; operator estimates use fixed
    Frobenius budgets (0.05 for S2, 0.1 for S4 and invariance). The S4
    comparison only runs for ``d <= 3``.
    """
    from .rng import derive_stream

    stream = lambda tag: derive_stream(seed, (d, tag))  # noqa: E731
    scalar_tol = float(5 / np.sqrt(n_samples))
    out = []

    s2 = estimate_S2(d, n_samples, stream(1))
    err = float(np.linalg.norm(s2 - swap_operator(d) / d))
    out.append(CheckResult("S2 = SWAP/d", err, 0.05, err <= 0.05, "Frobenius distance"))

    moments = trace_moments(d, n_samples, stream(2))
    dev = float(abs(moments["abs2"].value - 1.0))
    out.append(CheckResult("E|tr U|^2 = 1", dev, scalar_tol, dev <= scalar_tol, f"estimate {moments['abs2'].value:.5f}"))
    dev = float(abs(moments["tr"].value))
    out.append(CheckResult("E[tr U] = 0", dev, scalar_tol, dev <= scalar_tol, f"estimate {moments['tr'].value:.5f}"))

    if d <= 3:
        s4 = estimate_S4(d, n_samples, stream(3))
        err = float(np.linalg.norm(s4 - analytic_S4(d)))
        out.append(CheckResult("S4 closed form", err, 0.1, err <= 0.1, "Frobenius distance"))

    v = sample_haar_unitary(d, stream(4))
    dist = invariance_check(d, v, n_samples, stream(5))
    out.append(CheckResult("right invariance", dist, 0.1, dist <= 0.1, "Frobenius distance of S2 estimates"))
    return out

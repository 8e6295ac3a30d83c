import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qnfl.errors import DomainError, ShapeError
from qnfl.haar import haar_states, sample_haar_unitary
from qnfl.linalg import UnitaryOperator
from qnfl.risk import (
    RiskEstimate,
    quantum_nfl_bound,
    risk_closed_form,
    risk_mc_fidelity,
    risk_mc_tracenorm,
    trace_distance_dense,
    trace_distance_pure,
)
from qnfl.rng import RngStream

I2 = UnitaryOperator(np.eye(2))
X = UnitaryOperator(np.array([[0, 1], [1, 0]]))


def haar_pair(d, seed):
    return sample_haar_unitary(d, RngStream(seed, 1)), sample_haar_unitary(d, RngStream(seed, 2))


class TestClosedForm:
    def test_perfect(self):
        u, _ = haar_pair(4, 0)
        r = risk_closed_form(u, u)
        assert r.mean == 0 and r.std_error == 0 and r.samples == 1

    def test_pauli_x(self):
        assert abs(risk_closed_form(I2, X).mean - 2 / 3) < 1e-15

    @pytest.mark.parametrize("theta", np.linspace(0, 2 * np.pi, 9))
    def test_global_phase(self, theta):
        u, v = haar_pair(3, 1)
        shifted = UnitaryOperator(np.exp(1j * theta) * v.matrix)
        assert abs(risk_closed_form(u, shifted).mean - risk_closed_form(u, v).mean) < 1e-14
        assert risk_closed_form(u, UnitaryOperator(np.exp(1j * theta) * u.matrix)).mean < 1e-14

    def test_left_invariance(self):
        u, v = haar_pair(4, 2)
        w = sample_haar_unitary(4, RngStream(2, 3))
        assert abs(risk_closed_form(w @ u, w @ v).mean - risk_closed_form(u, v).mean) <= 1e-12

    @given(st.integers(1, 6), st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_range(self, d, seed):
        u, v = haar_pair(d, seed)
        r = risk_closed_form(u, v).mean
        assert -1e-12 <= r <= d / (d + 1) + 1e-12

    def test_dim_mismatch(self):
        with pytest.raises(ShapeError):
            risk_closed_form(I2, UnitaryOperator(np.eye(3)))


class TestMonteCarlo:
    def test_fidelity_perfect(self):
        u, _ = haar_pair(3, 4)
        r = risk_mc_fidelity(u, u, 1000, RngStream(4))
        assert np.max(r.per_sample) < 1e-14
        assert r.mean < 1e-14

    def test_fidelity_pauli_x(self):
        r = risk_mc_fidelity(I2, X, 100_000, RngStream(5))
        assert abs(r.mean - 2 / 3) <= 3 * r.std_error

    def test_fidelity_random_d4(self):
        u, v = haar_pair(4, 6)
        r = risk_mc_fidelity(u, v, 100_000, RngStream(6))
        assert abs(r.mean - risk_closed_form(u, v).mean) <= 3 * r.std_error

    def test_tracenorm_perfect(self):
        u, _ = haar_pair(2, 7)
        assert risk_mc_tracenorm(u, u, 500, RngStream(7)).mean < 1e-14

    def test_orthogonal_outputs(self):
        zero = np.array([[1, 0]], dtype=complex)
        assert trace_distance_pure(zero @ I2.matrix.T, zero @ X.matrix.T)[0] == 1.0

    def test_per_sample_identity_d3(self):
        u, v = haar_pair(3, 8)
        fid = risk_mc_fidelity(u, v, 10_000, RngStream(8))
        tn = risk_mc_tracenorm(u, v, 10_000, RngStream(8))
        assert np.max(np.abs(fid.per_sample - tn.per_sample)) <= 1e-10

    def test_closed_two_by_two_against_eigensolver(self):
        # Oracle: full spectrum of the rank-2 projector difference.
        d = 5
        u, v = haar_pair(d, 9)
        states = haar_states(d, 200, RngStream(9))
        a, b = states @ u.matrix.T, states @ v.matrix.T
        dense = np.array([trace_distance_dense(x, y) for x, y in zip(a, b)])
        assert np.max(np.abs(dense - trace_distance_pure(a, b))) < 1e-10

    def test_dense_debug_path(self):
        u, v = haar_pair(3, 10)
        risk_mc_tracenorm(u, v, 200, RngStream(10), check_dense=True)

    def test_sample_floor(self):
        with pytest.raises(DomainError):
            risk_mc_fidelity(I2, X, 10, RngStream(0))

    def test_standard_error_is_bessel_corrected(self):
        u, v = haar_pair(2, 11)
        r = risk_mc_fidelity(u, v, 400, RngStream(11))
        x = r.per_sample
        manual = np.sqrt(np.sum((x - x.mean()) ** 2) / (x.size - 1) / x.size)
        assert abs(r.std_error - manual) < 1e-15

    def test_estimate_validation(self):
        with pytest.raises(ValueError):
            RiskEstimate(0.5, 0.1, 1, "closed_form")


@pytest.mark.parametrize("d", [2, 3, 4])
def test_three_forms_agree(d):
    for seed in range(3):
        u, v = haar_pair(d, 100 + seed)
        closed = risk_closed_form(u, v).mean
        fid = risk_mc_fidelity(u, v, 10_000, RngStream(seed, d))
        tn = risk_mc_tracenorm(u, v, 10_000, RngStream(seed, d))
        assert abs(fid.mean - closed) <= 3 * fid.std_error
        assert abs(tn.mean - closed) <= 3 * tn.std_error


class TestBound:
    @pytest.mark.parametrize("n,raw", [(1, 0.7), (2, 0.55), (3, 0.3)])
    def test_d4_values(self, n, raw):
        b = quantum_nfl_bound(4, n)
        assert abs(b.raw - raw) < 1e-15
        assert b.clamped == b.raw

    def test_full_rank_overshoot(self):
        b = quantum_nfl_bound(4, 4)
        assert abs(b.raw + 0.05) < 1e-15
        assert b.clamped == 0

    def test_domain(self):
        with pytest.raises(DomainError):
            quantum_nfl_bound(4, 5)


def test_standard_error_calibration():
    # z-scores of the MC estimate against the closed form should be ~N(0, 1).
    z = []
    for seed in range(300):
        u, v = haar_pair(3, 1000 + seed)
        r = risk_mc_fidelity(u, v, 2000, RngStream(seed, 77))
        z.append((r.mean - risk_closed_form(u, v).mean) / r.std_error)
    z = np.array(z)
    assert abs(z.mean()) <= 4 / np.sqrt(z.size)
    assert 0.85 <= z.std(ddof=1) <= 1.15

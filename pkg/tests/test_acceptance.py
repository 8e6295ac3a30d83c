"""End-to-end acceptance checks.

Each criterion prints one ``[PASS]``/``[FAIL]`` line (run with ``-s`` to see
them live) and asserts at its stated tolerance.
"""

from __future__ import annotations

import time
from fractions import Fraction

import numpy as np
import pytest

from qnfl.classical import (
    brute_force_expected_risk,
    brute_force_invertible_expected_risk,
    classical_bound,
    invertible_bound,
)
from qnfl.cli import main as cli_main
from qnfl.experiment import ExperimentConfig, run_experiment, run_trials
from qnfl.haar import sample_haar_unitary, verify_haar
from qnfl.hypothesis import optimal_hypothesis, realize_training_set
from qnfl.linalg import gell_mann_basis
from qnfl.risk import quantum_nfl_bound, risk_closed_form, risk_mc_fidelity, risk_mc_tracenorm
from qnfl.rng import RngStream, derive_stream
from qnfl.variational import VariationalParams, cost, gradient_fd, params_to_unitary


def report(number: int, title: str, ok: bool, detail: str, started: float) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"\n[{status}] criterion {number}: {title} ({detail}; {time.perf_counter() - started:.1f}s)")
    assert ok, detail


def test_criterion_1_haar_identities():
    t0 = time.perf_counter()
    checks = [(d, c) for d in (2, 3) for c in verify_haar(d, 100_000, 42)]
    failed = [f"d={d} {c.name}={c.value:.4g}" for d, c in checks if not c.passed]
    report(1, "Haar identity suite", not failed, ", ".join(failed) or f"{len(checks)} checks", t0)


def test_criterion_2_risk_forms():
    t0 = time.perf_counter()
    worst_sigma, worst_gap = 0.0, 0.0
    for d in (2, 3, 4):
        for seed in range(20):
            u = sample_haar_unitary(d, derive_stream(seed, (d, 1)))
            v = sample_haar_unitary(d, derive_stream(seed, (d, 2)))
            closed = risk_closed_form(u, v).mean
            states = derive_stream(seed, (d, 3))
            fid = risk_mc_fidelity(u, v, 10_000, states)
            tn = risk_mc_tracenorm(u, v, 10_000, states)
            worst_sigma = max(worst_sigma, abs(fid.mean - closed) / fid.std_error, abs(tn.mean - closed) / tn.std_error)
            worst_gap = max(worst_gap, float(np.max(np.abs(fid.per_sample - tn.per_sample))))
    ok = worst_sigma <= 3 and worst_gap <= 1e-10
    report(2, "risk-form equivalence", ok, f"worst {worst_sigma:.2f} sigma, per-sample gap {worst_gap:.1e}", t0)


def test_criterion_3_moment_law():
    t0 = time.perf_counter()
    trials = 10_000
    parts, ok = [], True
    for d, n in ((2, 1), (4, 1), (4, 2), (4, 3)):
        vals = np.empty(trials)
        for s in range(trials):
            u = sample_haar_unitary(d, derive_stream(s, (d, n, 1)))
            ts = realize_training_set(u, n, derive_stream(s, (d, n, 2)))
            v = optimal_hypothesis(ts, u, derive_stream(s, (d, n, 3))).unitary
            vals[s] = abs(np.vdot(u.matrix, v.matrix)) ** 2
        se = vals.std(ddof=1) / np.sqrt(trials)
        z = (vals.mean() - (n * n + 1)) / se
        ok &= abs(z) <= 3
        parts.append(f"({d},{n}) {vals.mean():.3f} vs {n * n + 1} [{z:+.2f} se]")
    report(3, "moment law n^2+1", ok, "; ".join(parts), t0)


def test_criterion_4_optimal_attains_bound():
    t0 = time.perf_counter()
    cfg = ExperimentConfig(dim=4, n_values=(1, 2, 3, 4), u_trials=100, s_trials_per_u=10, master_seed=42)
    rows = run_experiment(cfg)
    ok, parts = True, []
    for row, expected in zip(rows, (0.7, 0.55, 0.3, 0.0)):
        if row.n == 4:
            full = max(t.risk for t in run_trials(ExperimentConfig(n_values=(4,), u_trials=100, s_trials_per_u=10)))
            ok &= full <= 1e-10 and row.trials == 1000
            parts.append(f"n=4 max {full:.1e}")
        else:
            ok &= abs(row.avg_risk - expected) <= 3 * row.std_error and row.trials == 1000
            parts.append(f"n={row.n} {row.avg_risk:.4f}+-{row.std_error:.4f} vs {expected}")
    report(4, "quantum NFL attainment (optimal)", ok, "; ".join(parts), t0)


@pytest.mark.slow
def test_criterion_5_variational_learner():
    t0 = time.perf_counter()
    cfg = ExperimentConfig(
        dim=4, n_values=(1, 2, 3), u_trials=100, s_trials_per_u=1, hypothesis_mode="variational", master_seed=42
    )
    rows = run_experiment(cfg)
    ok, parts = True, []
    for row in rows:
        bound = quantum_nfl_bound(4, row.n).clamped
        hit_rate = 1 - row.below_target / row.trials
        ok &= row.trials >= 100 and hit_rate >= 0.99
        ok &= bound - 3 * row.std_error <= row.avg_risk <= bound + 0.1
        parts.append(f"n={row.n} {row.avg_risk:.4f}+-{row.std_error:.4f} bound {bound:.4g} hit {hit_rate:.0%}")
    report(5, "variational learner", ok, "; ".join(parts), t0)


def test_criterion_6_classical_exact():
    t0 = time.perf_counter()
    ok = True
    for (x, y, n), want in {(3, 2, 1): Fraction(1, 3), (4, 2, 2): Fraction(1, 4)}.items():
        r = brute_force_expected_risk(x, y, n).expected_risk
        ok &= r == want == classical_bound(x, y, n)
    for (x, n), want in {(4, 1): Fraction(1, 2), (5, 2): Fraction(2, 5), (4, 3): Fraction(0)}.items():
        r = brute_force_invertible_expected_risk(x, n).expected_risk
        ok &= r == want == invertible_bound(x, n)
    report(6, "classical equalities", ok, "exact rationals", t0)


def test_criterion_7_determinism(tmp_path, capsys):
    t0 = time.perf_counter()
    cfg = tmp_path / "small.cfg"
    cfg.write_text("dim = 4\npairs = 1,2,3,4\nu-trials = 20\ns-trials = 4\nseed = 42\n")
    outs = []
    for threads in (1, 8):
        out = tmp_path / f"t{threads}.csv"
        assert cli_main(["nfl-quantum", "--config", str(cfg), "--threads", str(threads), "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    capsys.readouterr()
    with capsys.disabled():
        report(7, "determinism across worker counts", outs[0] == outs[1], f"{len(outs[0])} bytes", t0)


def test_criterion_8_gradient():
    t0 = time.perf_counter()
    d, h = 4, 1e-5
    basis = gell_mann_basis(d)
    gen = RngStream(42, 8).generator()
    worst = 0.0
    for k in range(50):
        n = 1 + k % d
        u = sample_haar_unitary(d, derive_stream(k, (d, 1)))
        ts = realize_training_set(u, n, derive_stream(k, (d, 2)))
        theta = gen.standard_normal(d * d)
        direction = gen.standard_normal(d * d)
        direction /= np.linalg.norm(direction)

        def f(t):
            return cost(params_to_unitary(VariationalParams(t), basis), ts)

        fd = (f(theta + h * direction) - f(theta - h * direction)) / (2 * h)
        g = gradient_fd(VariationalParams(theta), ts, basis, h)
        worst = max(worst, abs(fd - g @ direction))
    report(8, "gradient correctness", worst <= 1e-5, f"worst directional gap {worst:.1e}", t0)

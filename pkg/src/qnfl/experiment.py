"""Averaged-risk experiment over Haar targets, training sets and hypotheses.

Every ``(n, u_trial, s_trial)`` cell draws its randomness from streams
derived from the master seed and the cell labels, so the result does not
depend on how cells are scheduled across workers.
"""

from __future__ import annotations

import csv
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .classical import classical_bound, invertible_bound
from .errors import DomainError
from .haar import sample_haar_unitary
from .hypothesis import optimal_hypothesis, realize_training_set
from .linalg import gell_mann_basis
from .risk import quantum_nfl_bound, risk_closed_form, risk_mc_fidelity
from .rng import derive_stream
from .variational import TrainConfig, train

log = logging.getLogger(__name__)

# Purpose tags mixed into stream labels.
TAG_TARGET = 1
TAG_TRAINING = 2
TAG_HYPOTHESIS = 3
TAG_RISK = 4

CSV_HEADER = (
    "n",
    "avg_risk",
    "std_error",
    "trials",
    "bound_quantum_raw",
    "bound_quantum",
    "bound_classical",
    "bound_classical_inv",
)


@dataclass(frozen=True)
class ExperimentConfig:
    dim: int = 4
    n_values: tuple[int, ...] = (1, 2, 3, 4)
    u_trials: int = 100
    s_trials_per_u: int = 10
    risk_method: Literal["closed_form", "mc_fidelity"] = "closed_form"
    risk_samples: int = 10_000
    hypothesis_mode: Literal["optimal_block", "variational"] = "optimal_block"
    train_config: TrainConfig = field(default_factory=TrainConfig)
    master_seed: int = 42
    output_path: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        if self.dim < 1:
            raise DomainError("dim must be >= 1")
        if not self.n_values or any(not 1 <= n <= self.dim for n in self.n_values):
            raise DomainError(f"n_values must be non-empty and within [1, {self.dim}]")
        if self.u_trials < 1 or self.s_trials_per_u < 1:
            raise DomainError("u_trials and s_trials_per_u must be >= 1")
        if self.risk_method not in ("closed_form", "mc_fidelity"):
            raise DomainError(f"unknown risk method {self.risk_method!r}")
        if self.hypothesis_mode not in ("optimal_block", "variational"):
            raise DomainError(f"unknown hypothesis mode {self.hypothesis_mode!r}")
        if self.risk_method == "mc_fidelity" and self.risk_samples < 100:
            raise DomainError("risk_samples must be >= 100")


@dataclass(frozen=True)
class TrialResult:
    n: int
    u_index: int
    s_index: int
    risk: float
    trace_abs2: float
    rank: int
    trace_w: complex | None = None
    reached_target: bool = True
    train_cost: float | None = None


@dataclass(frozen=True)
class ExperimentRow:
    n: int
    avg_risk: float
    std_error: float
    trials: int
    bound_quantum_raw: float
    bound_quantum: float
    bound_classical: float
    bound_classical_inv: float
    below_target: int = 0


def run_trial(config: ExperimentConfig, n: int, u_index: int, s_index: int) -> TrialResult:
    """One cell: Haar target, realizable training set, hypothesis, risk."""
    seed, d = config.master_seed, config.dim
    # The target depends only on the u-trial, so each n sees the same unitaries.
    u = sample_haar_unitary(d, derive_stream(seed, (u_index, TAG_TARGET)))
    training = realize_training_set(u, n, derive_stream(seed, (n, u_index, s_index, TAG_TRAINING)))
    hyp_stream = derive_stream(seed, (n, u_index, s_index, TAG_HYPOTHESIS))

    trace_w = None
    reached, train_cost = True, None
    if config.hypothesis_mode == "optimal_block":
        hyp = optimal_hypothesis(training, u, hyp_stream)
        trace_w = complex(np.trace(hyp.metadata["residual_block"]))
    else:
        hyp = train(training, config.train_config, gell_mann_basis(d), hyp_stream)
        reached, train_cost = hyp.metadata["reached_target"], hyp.metadata["cost"]

    v = hyp.unitary
    trace_abs2 = float(abs(np.vdot(u.matrix, v.matrix)) ** 2)
    if config.risk_method == "closed_form":
        risk = risk_closed_form(u, v).mean
    else:
        risk_stream = derive_stream(seed, (n, u_index, s_index, TAG_RISK))
        risk = risk_mc_fidelity(u, v, config.risk_samples, risk_stream).mean
    return TrialResult(n, u_index, s_index, risk, trace_abs2, training.rank, trace_w, reached, train_cost)


def _run_cell(args) -> TrialResult:
    return run_trial(*args)


def run_trials(config: ExperimentConfig, workers: int = 1) -> list[TrialResult]:
    """All cells of the experiment grid, sorted by ``(n, u_index, s_index)``."""
    cells = [
        (config, n, u, s)
        for n in config.n_values
        for u in range(config.u_trials)
        for s in range(config.s_trials_per_u)
    ]
    if workers <= 1:
        results = [_run_cell(c) for c in cells]
    else:
        chunk = max(1, len(cells) // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_cell, cells, chunksize=chunk))
    return sorted(results, key=lambda r: (r.n, r.u_index, r.s_index))


def bound_columns(d: int, n: int) -> dict[str, float]:
    q = quantum_nfl_bound(d, n)
    return {
        "bound_quantum_raw": q.raw,
        "bound_quantum": q.clamped,
        "bound_classical": float(classical_bound(d, d, n)),
        "bound_classical_inv": float(invertible_bound(d, n)),
    }


def aggregate(config: ExperimentConfig, trials: Sequence[TrialResult]) -> list[ExperimentRow]:
    rows = []
    for n in config.n_values:
        sel = sorted((t for t in trials if t.n == n), key=lambda t: (t.u_index, t.s_index))
        risks = np.array([t.risk for t in sel])
        se = float(risks.std(ddof=1) / np.sqrt(risks.size)) if risks.size > 1 else 0.0
        rows.append(
            ExperimentRow(
                n=n,
                avg_risk=float(risks.mean()),
                std_error=se,
                trials=risks.size,
                below_target=sum(not t.reached_target for t in sel),
                **bound_columns(config.dim, n),
            )
        )
    return rows


def run_experiment(config: ExperimentConfig, workers: int = 1) -> list[ExperimentRow]:
    """Average risk per training-set size with the three bound overlays.

    Output is bit-identical for any ``workers`` at a fixed configuration.
    """
    trials = run_trials(config, workers)
    rows = aggregate(config, trials)
    for row in rows:
        if row.below_target:
            log.warning("n=%d: %d of %d trials below target cost", row.n, row.below_target, row.trials)
    if config.output_path:
        emit_csv(rows, config.output_path)
    return rows


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.10g}"


def format_csv(rows: Sequence[ExperimentRow]) -> str:
    lines = [",".join(CSV_HEADER)]
    for row in rows:
        lines.append(",".join(_fmt(getattr(row, col)) for col in CSV_HEADER))
    return "\n".join(lines) + "\n"


def emit_csv(rows: Sequence[ExperimentRow], path: str | os.PathLike) -> None:
    """Write rows as UTF-8 CSV with a fixed header; reals at 10 significant digits."""
    rows = list(rows)
    if not rows:
        raise DomainError("refusing to write a CSV with no rows")
    text = format_csv(rows)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc.strerror or exc}") from exc


def parse_csv(path: str | os.PathLike) -> list[ExperimentRow]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise DomainError(f"unexpected CSV header {reader.fieldnames}")
        return [
            ExperimentRow(
                n=int(r["n"]),
                trials=int(r["trials"]),
                **{k: float(r[k]) for k in CSV_HEADER if k not in ("n", "trials")},
            )
            for r in reader
        ]


def format_table(rows: Sequence[ExperimentRow]) -> str:
    head = f"{'n':>3} {'avg_risk':>10} {'std_err':>9} {'trials':>7} {'Q bound':>9} {'C bound':>9} {'C inv':>9}"
    lines = [head]
    for r in rows:
        lines.append(
            f"{r.n:>3} {r.avg_risk:>10.5f} {r.std_error:>9.5f} {r.trials:>7d} "
            f"{r.bound_quantum_raw:>9.5f} {r.bound_classical:>9.5f} {r.bound_classical_inv:>9.5f}"
        )
        if r.bound_quantum_raw < 0:
            lines.append(f"    note: quantum bound formula is negative at n=d ({r.bound_quantum_raw:.4g}); clamped to 0")
        if r.below_target:
            lines.append(f"    note: {r.below_target} trial(s) did not reach the target cost")
    return "\n".join(lines)


def default_workers() -> int:
    return os.cpu_count() or 1

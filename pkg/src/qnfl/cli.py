"""Command-line interface: ``qnfl <command> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys
from fractions import Fraction

import numpy as np

from . import experiment as exp
from .classical import (
    brute_force_expected_risk,
    brute_force_invertible_expected_risk,
    classical_bound,
    invertible_bound,
    invertible_bound_raw,
)
from .haar import sample_haar_unitary, verify_haar
from .hypothesis import realize_training_set
from .linalg import gell_mann_basis
from .risk import quantum_nfl_bound, risk_closed_form, risk_mc_fidelity, risk_mc_tracenorm
from .rng import derive_stream
from .variational import TrainConfig, train


def int_list(text: str) -> list[int]:
    """Parse ``1,2,3`` or an inclusive range ``0..4``."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",") if x.strip()]


def read_config(path: str) -> dict[str, str]:
    """Plain ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise SystemExit(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.lstrip("-")] = value
    return out


def _common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=42, help="master seed (default 42)")
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--threads", type=int, default=None, help="worker processes (default: all cores)")
    p.add_argument("--config", default=None, help="key=value file; flags override it")
    p.add_argument("-v", "--verbose", action="store_true")


def _train_flags(p: argparse.ArgumentParser):
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--iters", type=int, default=50_000)
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--target", type=float, default=1 - 1e-6)
    p.add_argument("--fd-step", type=float, default=1e-5)
    p.add_argument("--init-scale", type=float, default=0.1)


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        learning_rate=args.lr,
        max_iters=args.iters,
        target_cost=args.target,
        fd_step=args.fd_step,
        restarts=args.restarts,
        init_scale=args.init_scale,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qnfl", description="Quantum no-free-lunch simulations.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("nfl-quantum", help="averaged risk vs number of training pairs")
    _common(p)
    p.add_argument("--dim", type=int, default=4)
    p.add_argument("--pairs", type=int_list, default=[1, 2, 3, 4])
    p.add_argument("--u-trials", type=int, default=100)
    p.add_argument("--s-trials", type=int, default=10)
    p.add_argument("--mode", choices=["optimal", "variational"], default="optimal")
    p.add_argument("--risk", choices=["closed", "mc"], default="closed")
    p.add_argument("--risk-samples", type=int, default=10_000)
    _train_flags(p)
    p.set_defaults(func=cmd_nfl_quantum)

    p = sub.add_parser("risk", help="all three risk evaluations for a random pair")
    _common(p)
    p.add_argument("--dim", type=int, default=4)
    p.add_argument("--mc", type=int, default=10_000)
    p.set_defaults(func=cmd_risk)

    p = sub.add_parser("verify-haar", help="Monte Carlo checks of Haar moment identities")
    _common(p)
    p.add_argument("--dim", type=int_list, default=[2, 3])
    p.add_argument("--samples", type=int, default=100_000)
    p.set_defaults(func=cmd_verify_haar)

    p = sub.add_parser("nfl-classical", help="exact classical bounds and enumeration")
    _common(p)
    p.add_argument("--x-size", type=int, default=4)
    p.add_argument("--y-size", type=int, default=4)
    p.add_argument("--pairs", type=int_list, default=[0, 1, 2, 3, 4])
    p.add_argument("--invertible", action="store_true")
    p.add_argument("--brute-force", action="store_true")
    p.set_defaults(func=cmd_nfl_classical)

    p = sub.add_parser("train-qnn", help="train one variational hypothesis")
    _common(p)
    p.add_argument("--dim", type=int, default=4)
    p.add_argument("--pairs", type=int, default=2)
    _train_flags(p)
    p.set_defaults(func=cmd_train_qnn)
    return parser


def _emit(args, text: str):
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def cmd_nfl_quantum(args) -> int:
    config = exp.ExperimentConfig(
        dim=args.dim,
        n_values=tuple(args.pairs),
        u_trials=args.u_trials,
        s_trials_per_u=args.s_trials,
        risk_method="closed_form" if args.risk == "closed" else "mc_fidelity",
        risk_samples=args.risk_samples,
        hypothesis_mode="optimal_block" if args.mode == "optimal" else "variational",
        train_config=_train_config(args),
        master_seed=args.seed,
        output_path=args.out,
    )
    workers = args.threads or exp.default_workers()
    rows = exp.run_experiment(config, workers=workers)
    if args.out:
        print(exp.format_table(rows))
    else:
        sys.stdout.write(exp.format_csv(rows))
        print(exp.format_table(rows), file=sys.stderr)
    return 0


def cmd_risk(args) -> int:
    d = args.dim
    u = sample_haar_unitary(d, derive_stream(args.seed, (d, 1)))
    v = sample_haar_unitary(d, derive_stream(args.seed, (d, 2)))
    closed = risk_closed_form(u, v)
    states = derive_stream(args.seed, (d, 3))
    fid = risk_mc_fidelity(u, v, args.mc, states)
    tn = risk_mc_tracenorm(u, v, args.mc, states)
    per_sample = float(np.max(np.abs(fid.per_sample - tn.per_sample)))
    lines = [
        f"dimension           {d}",
        f"closed form         {closed.mean:.6f}",
        f"MC fidelity         {fid.mean:.6f} +- {fid.std_error:.6f}  ({(fid.mean - closed.mean) / fid.std_error:+.2f} sigma)",
        f"MC trace norm       {tn.mean:.6f} +- {tn.std_error:.6f}  ({(tn.mean - closed.mean) / tn.std_error:+.2f} sigma)",
        f"max per-sample gap  {per_sample:.2e}",
    ]
    _emit(args, "\n".join(lines))
    return 0


def cmd_verify_haar(args) -> int:
    ok = True
    lines = []
    for d in args.dim:
        for check in verify_haar(d, args.samples, args.seed):
            ok &= bool(check.passed)
            status = "PASS" if check.passed else "FAIL"
            lines.append(
                f"[{status}] d={d} {check.name:<18} value={check.value:.5f} tol={check.tolerance:.5f}  {check.detail}"
            )
    lines.append("all checks passed" if ok else "some checks FAILED")
    _emit(args, "\n".join(lines))
    return 0 if ok else 1


def _frac(x: Fraction) -> str:
    return str(x)


def cmd_nfl_classical(args) -> int:
    lines = []
    for n in args.pairs:
        if args.invertible:
            raw = invertible_bound_raw(args.x_size, n)
            line = f"n={n}  invertible bound {_frac(invertible_bound(args.x_size, n))}"
            if raw < 0:
                line += f" (raw {_frac(raw)})"
            if args.brute_force:
                res = brute_force_invertible_expected_risk(args.x_size, n)
                line += f"  enumerated {_frac(res.expected_risk)} over {res.function_count} bijections x {res.training_set_count} supports"
        else:
            line = f"n={n}  bound {_frac(classical_bound(args.x_size, args.y_size, n))}"
            if args.brute_force:
                res = brute_force_expected_risk(args.x_size, args.y_size, n)
                line += f"  enumerated {_frac(res.expected_risk)} over {res.function_count} functions x {res.training_set_count} supports"
        lines.append(line)
    _emit(args, "\n".join(lines))
    return 0


def cmd_train_qnn(args) -> int:
    d, n = args.dim, args.pairs
    u = sample_haar_unitary(d, derive_stream(args.seed, (d, 1)))
    training = realize_training_set(u, n, derive_stream(args.seed, (d, 2)))
    hyp = train(training, _train_config(args), gell_mann_basis(d), derive_stream(args.seed, (d, 3)))
    risk = risk_closed_form(u, hyp.unitary).mean
    bound = quantum_nfl_bound(d, n)
    meta = hyp.metadata
    lines = [
        f"final cost   {meta['cost']:.9f} ({'reached' if meta['reached_target'] else 'below'} target {args.target})",
        f"iterations   {meta['iterations']} over {meta['restarts']} restart(s)",
        f"risk         {risk:.6f}",
        f"NFL bound    {bound.clamped:.6f} (raw {bound.raw:.6f}; the bound holds on average, not per instance)",
    ]
    _emit(args, "\n".join(lines))
    return 0


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not args.config:
        return args
    values = read_config(args.config)
    # Re-parse with the file's values inserted before the explicit flags.
    prefix = []
    for key, value in values.items():
        if value.lower() in ("true", "yes", "on"):
            prefix.append(f"--{key}")
        elif value.lower() not in ("false", "no", "off"):
            prefix += [f"--{key}", value]
    return parser.parse_args([argv[0], *prefix, *argv[1:]])


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = _apply_config(parser, argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

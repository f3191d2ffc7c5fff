"""Command-line interface: ``apcodes <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from dataclasses import asdict, replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import formats
from .apcode import build_code, sample_matrix
from .ensembles import parse_ensemble, test_independence
from .errors import APCodeError
from .harness import emit, read_config, run_experiment
from .listrecovery import LRParams, capacity, is_list_recoverable
from .potential import lambda_trace, make_params, potential_K, test_mixing


def _fraction(text: str) -> float:
    return float(Fraction(text))


def _print_json(obj) -> None:
    json.dump(obj, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def cmd_capacity(args) -> int:
    print(repr(capacity(args.q, args.ell, args.rho)))
    return 0


def cmd_check_lr(args) -> int:
    code = formats.read_code(args.code)
    t0 = time.perf_counter()
    mode = {"exact": "exact", "random": "random", "auto": "auto"}[args.mode]
    ok, verdict = is_list_recoverable(code, LRParams(args.rho, args.ell, args.L), mode=mode,
                                      trials=args.trials, rng=np.random.default_rng(args.seed))
    _print_json({
        "max_count": verdict.max_count,
        "witness": verdict.witness.tolist(),
        "exhaustive": verdict.exhaustive,
        "is_list_recoverable": ok,
        "elapsed_ms": round((time.perf_counter() - t0) * 1000, 3),
    })
    return 0


def cmd_potential(args) -> int:
    code = formats.read_code(args.code)
    p = make_params(code.q, code.n, args.ell, args.L, args.rho)
    value = potential_K(code, p, mode=args.mode, trials=args.trials,
                        rng=np.random.default_rng(args.seed))
    out = {"K_log": value.log_K, "alpha": p.alpha, "beta": p.beta, "mode": value.mode}
    if value.K is not None:
        out["K_linear"] = value.K
    if value.trials is not None:
        out["trials"] = value.trials
    _print_json(out)
    return 0


def cmd_test_mixing(args) -> int:
    e = parse_ensemble(args.ensemble, args.seed)
    report = test_mixing(e, args.n, args.rho, args.ell, mode=args.mode, trials=args.trials,
                         rng=np.random.default_rng(args.seed))
    out = asdict(report)
    out["worst_B"] = report.worst_B.tolist()
    _print_json(out)
    return 0


def cmd_independence(args) -> int:
    e = parse_ensemble(args.ensemble, args.seed)
    report = test_independence(e, args.m, mode=args.mode, trials=args.trials,
                               rng=np.random.default_rng(args.seed))
    out = asdict(report)
    out["worst_tuple"] = list(report.worst_tuple)
    _print_json(out)
    return 0


def cmd_lambda(args) -> int:
    trace = lambda_trace(args.lambda0, args.k)
    writer = csv.writer(sys.stdout)
    writer.writerow(["i", "lambda", "bound"])
    for i, value in enumerate(trace.lambda_):
        writer.writerow([i, repr(value), repr(2 ** (i + 1) * args.lambda0)])
    if not trace.bound_ok:
        print("bound violated: lambda_k > 2^(k+1) lambda_0", file=sys.stderr)
        return 1
    return 0


def cmd_sample_code(args) -> int:
    e = parse_ensemble(args.ensemble, args.seed)
    Pi = sample_matrix(e, args.k, args.n, np.random.default_rng(args.seed))
    formats.write_code(build_code(Pi), args.out)
    if args.matrix_out:
        formats.write_matrix(Pi, args.matrix_out)
    return 0


def cmd_experiment(args) -> int:
    cfg = read_config(args.config)
    if args.workers is not None:
        cfg = replace(cfg, workers=args.workers)
    summary, records = run_experiment(cfg)
    if cfg.output:
        stem = Path(cfg.output)
        stem = stem.with_suffix("") if stem.suffix in (".json", ".csv") else stem
        formats.ensure_parent(stem)
        emit(summary, records, "json", stem.with_suffix(".json"))
        emit(summary, records, "csv", stem.with_suffix(".csv"))
    _print_json(asdict(summary))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="apcodes", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("capacity", help="print the list-recovery capacity")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--rho", type=_fraction, required=True)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("check-lr", help="certify list-recoverability of a code file")
    p.add_argument("--code", required=True)
    p.add_argument("--rho", type=_fraction, required=True)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--mode", choices=("exact", "random", "auto"), default="exact")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_check_lr)

    p = sub.add_parser("potential", help="compute the potential K_C of a code file")
    p.add_argument("--code", required=True)
    p.add_argument("--rho", type=_fraction, required=True)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--mode", choices=("exact", "sample", "sampled"), default="exact")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_potential)

    p = sub.add_parser("test-mixing", help="check the mixing conditions of an ensemble")
    p.add_argument("--ensemble", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--rho", type=_fraction, default=0.0)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--mode", choices=("exact", "sampled", "sample"), default="exact")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_test_mixing)

    p = sub.add_parser("independence", help="measure m-wise independence of an ensemble")
    p.add_argument("--ensemble", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--mode", choices=("exact", "sampled"), default="exact")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_independence)

    p = sub.add_parser("lambda", help="print the lambda recurrence as CSV")
    p.add_argument("--lambda0", type=float, required=True)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=cmd_lambda)

    p = sub.add_parser("sample-code", help="sample an AP code and write it to a code file")
    p.add_argument("--ensemble", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--matrix-out", default=None)
    p.set_defaults(func=cmd_sample_code)

    p = sub.add_parser("experiment", help="run a Monte Carlo experiment from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (APCodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

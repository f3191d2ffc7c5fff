"""Seeded Monte Carlo experiments over random AP codes.

Each trial derives its own seed from ``(master_seed, index)``, samples a
matrix, builds the code and certifies it.  Records are independent of the
number of workers and always written in index order.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from typing import Sequence

import numpy as np

from .apcode import build_code, sample_matrix
from .ensembles import parse_ensemble, random_bits_cost
from .errors import ConfigurationError, InfeasibleParametersError, ParameterError
from .listrecovery import (
    eta_min,
    max_intersection_exhaustive,
    max_intersection_randomized,
    rate_and_k,
)
from .potential import failure_bound, make_params, potential_K

log = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
SEED_ENV = "APCODES_MASTER_SEED"
AUTO_EXACT_CAP = 10 ** 5


def _mix64(z: int) -> int:
    # splitmix64 finaliser; a bijection on 64-bit words
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, index: int) -> int:
    """``mix64(mix64(master) + (index + 1) * gamma mod 2^64)``.

    ``gamma`` is odd, so the map is injective in ``index`` for a fixed master.
    """
    base = _mix64(master_seed & MASK64)
    return _mix64((base + (index + 1) * GOLDEN_GAMMA) & MASK64)


@dataclass(frozen=True)
class ExperimentConfig:
    q: int
    n: int
    ell: int
    rho: float
    L: int
    ensemble: str
    trials: int
    master_seed: int = 0
    eta: float | str = "min"
    check_mode: str = "auto"
    check_trials: int = 50
    k: int | None = None
    compute_potential: bool = False
    workers: int = 1
    output: str | None = None
    seed_source: str = "config"

    def resolved_eta(self) -> float:
        return eta_min(self.q, self.n) if self.eta in ("min", None) else float(self.eta)


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    seed: int
    k: int
    max_count: int
    is_lr: bool
    exhaustive: bool
    K_log: float | None
    elapsed_ms: float


@dataclass(frozen=True)
class ExperimentSummary:
    trials: int
    failures: int
    empirical_failure_rate: float
    theorem_bound: float
    theorem_bound_raw: float
    vacuous: bool
    random_bits_per_trial: int
    wall_time: float
    k: int
    rate: float
    rate_feasible: bool
    eta: float
    ensemble: str
    check_mode: str
    master_seed: int
    seed_source: str

    def comparable(self) -> dict:
        """Summary fields minus wall-clock timing."""
        d = asdict(self)
        d.pop("wall_time")
        return d


def resolve_k(cfg: ExperimentConfig) -> tuple[int, bool]:
    """Message length and whether it comes from the rate formula."""
    eta = cfg.resolved_eta()
    try:
        k = rate_and_k(cfg.q, cfg.ell, cfg.rho, cfg.L, cfg.n, eta).k
        feasible = True
    except (InfeasibleParametersError, ParameterError) as exc:
        if cfg.k is None:
            raise ConfigurationError(f"infeasible experiment parameters: {exc}") from exc
        feasible = False
    if cfg.k is not None:
        k = cfg.k
    return k, feasible


def _validate(cfg: ExperimentConfig):
    if cfg.trials < 1:
        raise ConfigurationError("trials must be >= 1")
    if cfg.check_mode not in ("auto", "exact", "random"):
        raise ConfigurationError(f"unknown check_mode {cfg.check_mode!r}")
    e = parse_ensemble(cfg.ensemble, cfg.master_seed)
    if e.q != cfg.q:
        raise ConfigurationError(f"ensemble {cfg.ensemble!r} has q={e.q}, config has q={cfg.q}")
    k, feasible = resolve_k(cfg)
    if k < 1:
        raise ConfigurationError("k must be >= 1")
    return e, k, feasible


def _check_mode(cfg: ExperimentConfig) -> str:
    if cfg.check_mode != "auto":
        return cfg.check_mode
    return "exact" if math.comb(cfg.q, cfg.ell) ** cfg.n <= AUTO_EXACT_CAP else "random"


def run_trial(cfg: ExperimentConfig, index: int) -> TrialRecord:
    e, k, _ = _validate(cfg)
    t0 = time.perf_counter()
    seed = derive_seed(cfg.master_seed, index)
    rng = np.random.default_rng(seed)
    code = build_code(sample_matrix(e, k, cfg.n, rng))
    if _check_mode(cfg) == "exact":
        verdict = max_intersection_exhaustive(code, cfg.rho, cfg.ell)
    else:
        verdict = max_intersection_randomized(code, cfg.rho, cfg.ell, cfg.check_trials, rng,
                                              L=cfg.L)
    K_log = None
    if cfg.compute_potential and math.comb(cfg.q, cfg.ell) ** cfg.n <= AUTO_EXACT_CAP:
        p = make_params(cfg.q, cfg.n, cfg.ell, cfg.L, cfg.rho)
        K_log = potential_K(code, p).log_K
    elapsed = (time.perf_counter() - t0) * 1000
    return TrialRecord(index, seed, k, verdict.max_count, verdict.max_count <= cfg.L,
                       verdict.exhaustive, K_log, elapsed)


def _trial_star(args):
    return run_trial(*args)


def run_experiment(cfg: ExperimentConfig) -> tuple[ExperimentSummary, list[TrialRecord]]:
    e, k, feasible = _validate(cfg)
    mode = _check_mode(cfg)
    if mode == "random":
        log.warning("randomized certification: is_lr=True only means no witness was found")
    if not feasible:
        log.warning("k=%d is an explicit override; the rate formula is infeasible here", k)
    t0 = time.perf_counter()
    jobs = [(cfg, i) for i in range(cfg.trials)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(_trial_star, jobs))
    else:
        records = [run_trial(cfg, i) for i in range(cfg.trials)]
    records.sort(key=lambda r: r.trial)
    failures = sum(1 for r in records if not r.is_lr)
    eta = cfg.resolved_eta()
    bound = failure_bound(cfg.q, k, cfg.n, eta)
    summary = ExperimentSummary(
        trials=cfg.trials,
        failures=failures,
        empirical_failure_rate=failures / cfg.trials,
        theorem_bound=bound.value,
        theorem_bound_raw=bound.raw,
        vacuous=bound.vacuous,
        random_bits_per_trial=random_bits_cost(e, k, cfg.n),
        wall_time=time.perf_counter() - t0,
        k=k,
        rate=k / (cfg.n * math.log2(cfg.q)),
        rate_feasible=feasible,
        eta=eta,
        ensemble=cfg.ensemble,
        check_mode=mode,
        master_seed=cfg.master_seed,
        seed_source=cfg.seed_source,
    )
    return summary, records


CSV_COLUMNS = ("trial", "seed", "k", "max_count", "is_lr", "elapsed_ms")


def emit(summary: ExperimentSummary, records: Sequence[TrialRecord], format: str, path) -> None:
    """Write the records as CSV or the summary as JSON."""
    try:
        with open(path, "w", newline="") as fh:
            if format == "csv":
                writer = csv.writer(fh)
                writer.writerow(CSV_COLUMNS)
                for r in records:
                    writer.writerow([r.trial, r.seed, r.k, r.max_count, int(r.is_lr),
                                     f"{r.elapsed_ms:.3f}"])
            elif format == "json":
                json.dump(asdict(summary), fh, indent=2, sort_keys=True)
                fh.write("\n")
            else:
                raise ParameterError(f"unknown output format {format!r}")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def load_summary(path) -> ExperimentSummary:
    with open(path) as fh:
        data = json.load(fh)
    return ExperimentSummary(**{f.name: data[f.name] for f in fields(ExperimentSummary)})


_BOOL = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


def _coerce(name: str, text: str):
    kind = {f.name: f.type for f in fields(ExperimentConfig)}[name]
    if name == "eta":
        return text if text == "min" else float(text)
    if name in ("k", "output") and text.lower() in ("none", ""):
        return None
    if kind == "bool":
        try:
            return _BOOL[text.lower()]
        except KeyError:
            raise ConfigurationError(f"{name}: expected a boolean, got {text!r}") from None
    if kind.startswith("int"):
        return int(text, 0)
    if kind == "float":
        from fractions import Fraction

        return float(Fraction(text))
    return text


def read_config(path, environ=None) -> ExperimentConfig:
    """Parse a flat ``key = value`` file; ``APCODES_MASTER_SEED`` overrides the seed."""
    environ = os.environ if environ is None else environ
    known = {f.name for f in fields(ExperimentConfig)}
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            sep = "=" if "=" in line else ":"
            key, _, value = line.partition(sep)
            key, value = key.strip(), value.strip()
            if key not in known or key == "seed_source":
                raise ConfigurationError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                values[key] = _coerce(key, value)
            except ValueError as exc:
                raise ConfigurationError(f"{path}:{lineno}: bad value for {key}: {value!r}") \
                    from exc
    if SEED_ENV in environ:
        values["master_seed"] = int(environ[SEED_ENV], 0)
        values["seed_source"] = f"env:{SEED_ENV}"
    missing = {"q", "n", "ell", "rho", "L", "ensemble", "trials"} - values.keys()
    if missing:
        raise ConfigurationError(f"{path}: missing keys {sorted(missing)}")
    return ExperimentConfig(**values)

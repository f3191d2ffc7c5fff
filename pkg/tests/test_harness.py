import csv
import json
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from apcodes.ensembles import parse_ensemble, random_bits_cost
from apcodes.errors import ConfigurationError
from apcodes.harness import (
    SEED_ENV,
    ExperimentConfig,
    derive_seed,
    emit,
    load_summary,
    read_config,
    run_experiment,
    run_trial,
)

GOLDEN = json.loads((Path(__file__).parent / "golden.json").read_text())
MASK = (1 << 64) - 1


def splitmix64_stream(state, count):
    """Reference splitmix64 generator (state advanced before mixing)."""
    out = []
    for _ in range(count):
        state = (state + 0x9E3779B97F4A7C15) & MASK
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        out.append(z ^ (z >> 31))
    return out


def small_cfg(**kw):
    base = dict(q=4, n=4, ell=1, rho=0.25, L=3, ensemble="additive:2^2/1,1,1", trials=20,
                k=3, check_mode="exact")
    base.update(kw)
    return ExperimentConfig(**base)


def test_derive_seed_golden():
    assert derive_seed(0, 0) == GOLDEN["derive_seed_0_0"]
    assert derive_seed(0, 1) == GOLDEN["derive_seed_0_1"]
    assert derive_seed(12345, 7) == GOLDEN["derive_seed_12345_7"]


def test_derive_seed_matches_splitmix_stream():
    # master 0 maps to base state 0, so index i is the (i+1)-th splitmix64 output
    assert [derive_seed(0, i) for i in range(5)] == splitmix64_stream(0, 5)
    assert derive_seed(0, 0) == 0xE220A8397B1DCDAF


def test_derive_seed_distinct_indices():
    rng = np.random.default_rng(0)
    for s in rng.integers(0, 2 ** 63, size=10_000).tolist():
        assert derive_seed(s, 0) != derive_seed(s, 1)
    seeds = {derive_seed(99, i) for i in range(50_000)}
    assert len(seeds) == 50_000


def test_identity_table_never_fails(tmp_path):
    table = tmp_path / "id.txt"
    table.write_text("0 1 2\n")
    cfg = ExperimentConfig(q=3, n=2, ell=1, rho=0, L=8, ensemble=f"table:{table}", trials=1, k=3)
    summary, records = run_experiment(cfg)
    assert summary.failures == 0 and len(records) == 1
    assert records[0].max_count == 8


def test_reproducible_records():
    cfg = small_cfg(master_seed=11)
    s1, r1 = run_experiment(cfg)
    s2, r2 = run_experiment(cfg)
    assert r1 == [replace(r, elapsed_ms=a.elapsed_ms) for r, a in zip(r2, r1)]
    assert s1.comparable() == s2.comparable()
    _, r3 = run_experiment(replace(cfg, master_seed=12))
    assert [r.seed for r in r3] == [derive_seed(12, i) for i in range(cfg.trials)]
    assert [r.seed for r in r1] != [r.seed for r in r3]


def test_workers_do_not_change_records():
    cfg = small_cfg(master_seed=3, trials=8)
    _, serial = run_experiment(cfg)
    _, par = run_experiment(replace(cfg, workers=2))
    strip = lambda rs: [(r.trial, r.seed, r.max_count, r.is_lr) for r in rs]  # noqa: E731
    assert strip(serial) == strip(par)


def test_summary_invariants():
    cfg = small_cfg(trials=30, L=1)
    summary, records = run_experiment(cfg)
    assert summary.failures == sum(not r.is_lr for r in records)
    assert summary.empirical_failure_rate == summary.failures / summary.trials
    e = parse_ensemble(cfg.ensemble)
    assert summary.random_bits_per_trial == random_bits_cost(e, summary.k, cfg.n)
    assert [r.seed for r in records] == [derive_seed(cfg.master_seed, i) for i in range(30)]
    assert not summary.rate_feasible


def test_run_trial_matches_experiment_record():
    cfg = small_cfg(master_seed=5)
    _, records = run_experiment(cfg)
    again = run_trial(cfg, 7)
    assert (again.seed, again.max_count, again.is_lr) == \
        (records[7].seed, records[7].max_count, records[7].is_lr)


def test_infeasible_rate_is_configuration_error():
    with pytest.raises(ConfigurationError):
        run_experiment(small_cfg(k=None))


def test_feasible_rate_sets_k():
    cfg = ExperimentConfig(q=16, n=8, ell=2, rho=0, L=7, ensemble="additive:16", trials=2,
                           check_mode="random", check_trials=5)
    summary, _ = run_experiment(cfg)
    assert summary.rate_feasible and summary.k == GOLDEN["rate_q16_ell2_rho0_L7_n8"]["k"]
    assert summary.check_mode == "random"


def test_bad_configs():
    with pytest.raises(ConfigurationError):
        run_experiment(small_cfg(trials=0))
    with pytest.raises(ConfigurationError):
        run_experiment(small_cfg(ensemble="uniform:5"))
    with pytest.raises(ConfigurationError):
        run_experiment(small_cfg(check_mode="maybe"))


def test_potential_recorded_when_requested():
    _, records = run_experiment(small_cfg(trials=3, compute_potential=True))
    assert all(r.K_log is not None for r in records)


def test_emit_csv_and_json(tmp_path):
    summary, records = run_experiment(small_cfg(trials=5))
    emit(summary, records, "csv", tmp_path / "r.csv")
    rows = list(csv.reader(open(tmp_path / "r.csv")))
    assert rows[0] == ["trial", "seed", "k", "max_count", "is_lr", "elapsed_ms"]
    assert len(rows) == 6
    emit(summary, [], "csv", tmp_path / "empty.csv")
    assert (tmp_path / "empty.csv").read_text().strip() == "trial,seed,k,max_count,is_lr,elapsed_ms"
    emit(summary, records, "json", tmp_path / "s.json")
    assert load_summary(tmp_path / "s.json") == summary


def test_emit_errors(tmp_path):
    summary, records = run_experiment(small_cfg(trials=1))
    with pytest.raises(OSError, match="missing"):
        emit(summary, records, "csv", tmp_path / "missing" / "r.csv")


def test_read_config(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text("# comment\nq = 4\nn: 4\nell = 1\nrho = 1/4\nL = 3\n"
                    "ensemble = additive:4\ntrials = 7\nk = 3\ncompute_potential = yes\n"
                    "eta = min\nmaster_seed = 0x10\n")
    cfg = read_config(path, environ={})
    assert cfg.rho == 0.25 and cfg.trials == 7 and cfg.compute_potential
    assert cfg.master_seed == 16 and cfg.seed_source == "config"
    cfg = read_config(path, environ={SEED_ENV: "42"})
    assert cfg.master_seed == 42 and cfg.seed_source == f"env:{SEED_ENV}"


@pytest.mark.parametrize("text", ["q = 4\n", "q = 4\nbogus = 1\n", "q = four\n"])
def test_read_config_errors(tmp_path, text):
    path = tmp_path / "bad.cfg"
    path.write_text(text)
    with pytest.raises(ConfigurationError):
        read_config(path, environ={})

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import entropy

from apcodes.apcode import CodeMultiset, build_code, sample_matrix
from apcodes.ensembles import uniform_ensemble
from apcodes.errors import (
    CapacityError,
    DomainError,
    InfeasibleParametersError,
    ParameterError,
    ValidationError,
)
from apcodes.listrecovery import (
    ListTuple,
    LRParams,
    all_tuple_counts,
    capacity,
    coverage,
    covers,
    eta_min,
    is_list_recoverable,
    max_intersection_exhaustive,
    max_intersection_naive,
    max_intersection_randomized,
    radius,
    rate_and_k,
)


def capacity_oracle(q, ell, rho):
    if rho >= 1 - ell / q:
        return 1.0
    nats = entropy([rho, 1 - rho]) + rho * math.log(q - ell) + (1 - rho) * math.log(ell)
    return nats / math.log(q)


def random_code(q, k, n, rng):
    return build_code(sample_matrix(uniform_ensemble(q), k, n, rng))


def test_radius_is_robust_to_float_error():
    assert radius(0.29, 100) == 29
    assert radius(0.5, 4) == 2
    assert radius(0.25, 3) == 0


def test_list_tuple_validation():
    B = ListTuple(((2, 0), (1, 3)), 4)
    assert B.Z == ((0, 2), (1, 3)) and (B.n, B.ell) == (2, 2)
    with pytest.raises(ValidationError):
        ListTuple(((0, 1), (2,)), 4)
    with pytest.raises(ValidationError):
        ListTuple(((0, 0),), 4)
    with pytest.raises(ValidationError):
        ListTuple(((0, 1, 2, 3),), 4)
    with pytest.raises(ValidationError):
        ListTuple(((0, 7),), 4)


def test_covers_examples():
    B = ListTuple(((0,), (0,), (0,), (0,)), 3)
    assert covers(B, (0, 0, 0, 0), 0)
    assert not covers(B, (0, 1, 0, 0), 0)
    assert covers(B, (1, 1, 0, 0), 0.5)
    assert not covers(B, (1, 1, 1, 0), 0.5)
    assert covers(B, (2, 2, 2, 2), 1)
    with pytest.raises(DomainError):
        covers(B, (0, 0), 0)


def test_exhaustive_examples():
    rng = np.random.default_rng(0)
    C = random_code(4, 3, 3, rng)
    assert max_intersection_exhaustive(C, 1, 2).max_count == 8
    triple = CodeMultiset(np.tile([1, 2, 0], (3, 1)), 3)
    for ell in (1, 2):
        assert max_intersection_exhaustive(triple, 0, ell).max_count == 3
    single = CodeMultiset(np.array([[2, 1]]), 3)
    assert max_intersection_exhaustive(single, 0, 1).max_count == 1


def test_repeated_word_verdict():
    C = CodeMultiset(np.array([[1, 2], [1, 2], [0, 0], [2, 1]]), 3, 2)
    ok, verdict = is_list_recoverable(C, LRParams(0, 1, 1), mode="exact")
    assert not ok
    assert verdict.max_count == 2
    assert covers(verdict.witness, (1, 2), 0)
    ok, _ = is_list_recoverable(C, LRParams(0, 1, 4), mode="exact")
    assert ok


def test_witness_recount_and_determinism():
    rng = np.random.default_rng(1)
    for _ in range(20):
        C = random_code(4, 3, 4, rng)
        for rho in (0, 0.25, 0.5):
            v = max_intersection_exhaustive(C, rho, 2)
            assert coverage(C, v.witness, rho) == v.max_count
            assert v == max_intersection_exhaustive(C, rho, 2)


def test_exhaustive_matches_naive_oracle():
    rng = np.random.default_rng(2)
    for _ in range(15):
        C = random_code(4, 3, 4, rng)
        for rho in (0, 0.25, 0.5):
            fast = max_intersection_exhaustive(C, rho, 2)
            slow, visited = max_intersection_naive(C, rho, 2)
            assert visited == math.comb(4, 2) ** 4
            assert fast.max_count == slow.max_count
            assert coverage(C, slow.witness, rho) == slow.max_count


def test_all_tuple_counts_matches_direct_recount():
    rng = np.random.default_rng(3)
    C = random_code(3, 2, 3, rng)
    counts = all_tuple_counts(C, 1 / 3, 2)
    subsets = list(itertools.combinations(range(3), 2))
    for idx, lists in enumerate(itertools.product(subsets, repeat=3)):
        assert counts[idx] == coverage(C, ListTuple(lists, 3), 1 / 3)


def test_exhaustive_cap():
    C = random_code(8, 6, 8, np.random.default_rng(0))
    with pytest.raises(CapacityError):
        max_intersection_exhaustive(C, 0, 3, cap=1000)


def test_randomized_is_lower_bound_and_seeded():
    rng = np.random.default_rng(4)
    for _ in range(10):
        C = random_code(4, 4, 4, rng)
        exact = max_intersection_exhaustive(C, 0.25, 2)
        a = max_intersection_randomized(C, 0.25, 2, 30, np.random.default_rng(9), L=2)
        b = max_intersection_randomized(C, 0.25, 2, 30, np.random.default_rng(9), L=2)
        assert a == b and not a.exhaustive
        assert a.max_count <= exact.max_count
        assert coverage(C, a.witness, 0.25) == a.max_count


def test_randomized_finds_repeated_word():
    C = CodeMultiset(np.array([[3, 3, 3]] * 5 + [[0, 1, 2]] * 3), 4, 3)
    v = max_intersection_randomized(C, 0, 1, 20, np.random.default_rng(0), L=1)
    assert v.max_count == 5


def test_randomized_rejects_zero_trials():
    C = CodeMultiset(np.array([[0, 1]]), 3)
    with pytest.raises(ParameterError):
        max_intersection_randomized(C, 0, 1, 0)


def test_capacity_examples():
    assert capacity(4, 2, 0.25) == pytest.approx(0.9056390622295664, abs=1e-12)
    assert capacity(5, 1, 0) == 0
    assert capacity(4, 2, 0.9) == 1.0
    with pytest.raises(DomainError):
        capacity(4, 4, 0.1)


@settings(max_examples=200)
@given(st.integers(3, 16).flatmap(lambda q: st.tuples(st.just(q), st.integers(1, q - 1))),
       st.floats(0, 1))
def test_capacity_matches_entropy_oracle(q_ell, rho):
    q, ell = q_ell
    assert capacity(q, ell, rho) == pytest.approx(capacity_oracle(q, ell, rho), abs=1e-12)


def test_eta_min():
    assert eta_min(2, 2) == pytest.approx(2 * math.log2(4 / math.log(2)) / 2, abs=1e-12)
    assert eta_min(2, 2) == pytest.approx(2.5287663729448977, abs=1e-12)
    assert eta_min(2 ** 40, 8) < eta_min(2 ** 20, 8) < eta_min(4, 8)


def test_rate_ell_one_substitution():
    q, n, L = 16, 4, 9
    eta = eta_min(q, n)
    info = rate_and_k(q, 1, 0, L, n)
    assert info.R == pytest.approx(1 - (1 + 1 / n) / (L + 1) - eta, abs=1e-12)


def test_rate_golden_point():
    q, ell, L, n = 16, 2, 7, 8
    R = 1 - math.log(2, 16) - (math.log(math.comb(16, 2), 16) + 1 / 8) / 8 \
        - 2 * math.log(16 / math.log(2), 16) / 8
    info = rate_and_k(q, ell, 0, L, n)
    assert info.R == pytest.approx(R, abs=1e-12)
    assert info.k == math.floor(R * 4 * 8) == 7


def test_rate_errors():
    with pytest.raises(ParameterError):
        rate_and_k(16, 2, 0, 7, 8, eta=0.01)
    with pytest.raises(InfeasibleParametersError) as info:
        rate_and_k(4, 1, 0.25, 3, 8)
    assert info.value.deficit > 0

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from apcodes.alphabet import FieldSpec, Permutation, field_add
from apcodes.apcode import (
    CodeMultiset,
    PermMatrix,
    additive_matrix,
    build_code,
    encode,
    encode_many,
    generating_sequence,
    intersection_count,
    message_bits,
    message_value,
    sample_matrix,
)
from apcodes.ensembles import table_ensemble, uniform_ensemble
from apcodes.errors import DomainError, ValidationError
from apcodes.listrecovery import ListTuple

CYC = [1, 2, 0]
SWAP01 = [1, 0, 2]
IDENT = [0, 1, 2]


def hand_matrix():
    return PermMatrix(np.array([[CYC, CYC], [SWAP01, IDENT]]))


def test_encode_zero_and_unit_messages():
    Pi = hand_matrix()
    assert encode(Pi, (0, 0)) == (0, 0)
    assert encode(Pi, (1, 0)) == (Pi.entry(0, 0)(0), Pi.entry(0, 1)(0))


def test_encode_hand_trace():
    # (0,0) -> row 1 -> (1,1) -> row 2 -> (0,1)
    assert encode(hand_matrix(), (1, 1)) == (0, 1)


def test_encode_rejects_bad_messages():
    with pytest.raises(DomainError):
        encode(hand_matrix(), (1,))
    with pytest.raises(DomainError):
        encode(hand_matrix(), (2, 0))


def test_message_bits_little_endian():
    assert message_bits(6, 3) == (0, 1, 1)
    assert message_value((0, 1, 1)) == 6


def test_code_multiset_examples():
    ident = PermMatrix(np.array([[[0, 1]]]))
    C = build_code(ident)
    assert C.counts() == {(0,): 2}
    flip = [1, 0]
    C = build_code(PermMatrix(np.array([[flip, flip], [flip, flip]])))
    assert C.words.tolist() == [[0, 0], [1, 1], [1, 1], [0, 0]]


def test_perm_matrix_validation():
    with pytest.raises(ValidationError):
        PermMatrix(np.array([[[0, 0, 2]]]))
    with pytest.raises(ValidationError):
        PermMatrix(np.zeros((0, 2, 3), dtype=int))
    Pi = hand_matrix()
    assert (Pi.k, Pi.n, Pi.q) == (2, 2, 3)
    with pytest.raises(ValueError):
        Pi.images[0, 0, 0] = 2


def test_from_entries():
    rows = [[Permutation(CYC), Permutation(CYC)], [Permutation(SWAP01), Permutation(IDENT)]]
    assert PermMatrix.from_entries(rows) == hand_matrix()
    with pytest.raises(ValidationError):
        PermMatrix.from_entries([[Permutation([0, 1]), Permutation(IDENT)]])


def test_code_size_enforced():
    with pytest.raises(ValidationError):
        CodeMultiset(np.zeros((3, 2), dtype=int), 2, k=2)
    with pytest.raises(ValidationError):
        CodeMultiset(np.array([[0, 5]]), 4)


def test_generating_sequence_identity():
    Pi = PermMatrix(np.tile(np.arange(3), (3, 2, 1)))
    seq = generating_sequence(Pi)
    assert len(seq) == 4
    for i, C in enumerate(seq):
        assert C.counts() == {(0, 0): 2 ** i}


def test_generating_sequence_recursion():
    rng = np.random.default_rng(4)
    Pi = sample_matrix(uniform_ensemble(4), 4, 3, rng)
    seq = generating_sequence(Pi)
    assert seq[0].words.tolist() == [[0, 0, 0]]
    for i in range(1, 5):
        prev = seq[i - 1]
        assert seq[i].same_multiset(prev.union(prev.image(Pi.images[i - 1])))
    assert np.array_equal(seq[-1].words, build_code(Pi).words)


def test_build_code_matches_per_message_encode():
    Pi = sample_matrix(uniform_ensemble(5), 5, 4, np.random.default_rng(2))
    C = build_code(Pi)
    for m in range(32):
        assert tuple(C.words[m]) == encode(Pi, message_bits(m, 5))
        assert tuple(encode_many(Pi, np.array([message_bits(m, 5)]))[0]) == encode(Pi, message_bits(m, 5))


def test_sample_matrix_single_entry_table():
    e = table_ensemble([Permutation(CYC)])
    Pi = sample_matrix(e, 2, 3, np.random.default_rng(0))
    assert (Pi.images == CYC).all()
    a = sample_matrix(uniform_ensemble(4), 3, 3, np.random.default_rng(9))
    b = sample_matrix(uniform_ensemble(4), 3, 3, np.random.default_rng(9))
    assert a == b


def test_additive_zero_generator():
    C = build_code(additive_matrix(np.zeros((3, 4), dtype=int), FieldSpec(2, 2)))
    assert C.counts() == {(0, 0, 0, 0): 8}


def xg_oracle(G, spec):
    k, n = G.shape
    words = []
    for x in itertools.product((0, 1), repeat=k):
        w = [0] * n
        for i, bit in enumerate(x):
            if bit:
                w = [field_add(w[j], int(G[i, j]), spec) for j in range(n)]
        words.append(tuple(w))
    return words


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([FieldSpec(2), FieldSpec(2, 2), FieldSpec(2, 3), FieldSpec(3), FieldSpec(5)]),
       st.integers(1, 5), st.integers(1, 6), st.integers(0, 2 ** 32 - 1))
def test_additive_code_is_span(spec, k, n, seed):
    G = np.random.default_rng(seed).integers(0, spec.q, (k, n))
    C = build_code(additive_matrix(G, spec))
    assert C.same_multiset(np.array(xg_oracle(G, spec)))


def test_row_order_invariance_for_shifts_only():
    spec = FieldSpec(2, 3)
    G = np.random.default_rng(11).integers(0, 8, (4, 5))
    base = build_code(additive_matrix(G, spec))
    for order in itertools.permutations(range(4)):
        assert build_code(additive_matrix(G[list(order)], spec)).same_multiset(base)
    # generic rows do not commute: swap and cycle on q=3
    Pi = PermMatrix(np.array([[SWAP01], [CYC]]))
    Pi_rev = PermMatrix(np.array([[CYC], [SWAP01]]))
    assert not build_code(Pi).same_multiset(build_code(Pi_rev))


def test_intersection_count():
    C = CodeMultiset(np.zeros((2, 3), dtype=int), 4, 1)
    B = ListTuple(((0, 1), (0, 2), (0, 3)), 4)
    assert intersection_count(C, B, 0) == 2
    assert intersection_count(C, ListTuple(((1, 2),) * 3, 4), 1) == 2
    with pytest.raises(DomainError):
        intersection_count(C, ListTuple(((0,),) * 3, 5), 0)


def test_intersection_count_matches_recount():
    rng = np.random.default_rng(5)
    for _ in range(30):
        C = build_code(sample_matrix(uniform_ensemble(4), 3, 4, rng))
        Z = tuple(tuple(rng.choice(4, 2, replace=False).tolist()) for _ in range(4))
        B = ListTuple(Z, 4)
        for rho in (0, 0.25, 0.5, 1):
            direct = sum(1 for w in C.words.tolist()
                         if sum(s not in z for s, z in zip(w, Z)) <= int(rho * 4))
            assert intersection_count(C, B, rho) == direct
        assert intersection_count(C, B, 1) == 8

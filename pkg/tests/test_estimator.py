import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from apcodes.apcode import build_code, encode, sample_matrix
from apcodes.ensembles import uniform_ensemble
from apcodes.estimator import APCodeEncoder, ListRecoveryCertifier
from apcodes.listrecovery import max_intersection_exhaustive


def test_encoder_fit_transform_matches_encode():
    enc = APCodeEncoder("uniform:5", k=4, n=3, random_state=0).fit()
    X = np.random.default_rng(1).integers(0, 2, (10, 4))
    Y = enc.transform(X)
    assert Y.shape == (10, 3)
    for x, y in zip(X, Y):
        assert tuple(y) == encode(enc.perm_matrix_, tuple(x))
    assert len(enc.code_) == 16


def test_encoder_reproducible_and_clonable():
    a = APCodeEncoder("additive:4", k=3, n=4, random_state=7).fit()
    b = clone(a).fit()
    assert a.perm_matrix_ == b.perm_matrix_
    assert b.get_params() == {"ensemble": "additive:4", "k": 3, "n": 4, "random_state": 7}


def test_encoder_from_matrix():
    Pi = sample_matrix(uniform_ensemble(3), 2, 2, np.random.default_rng(0))
    enc = APCodeEncoder.from_matrix(Pi)
    assert np.array_equal(enc.transform([[1, 1]])[0], encode(Pi, (1, 1)))


def test_encoder_input_validation():
    enc = APCodeEncoder("uniform:3", k=2, n=2, random_state=0)
    with pytest.raises(NotFittedError):
        enc.transform([[0, 1]])
    enc.fit()
    with pytest.raises(ValueError):
        enc.transform([[0, 1, 1]])
    with pytest.raises(ValueError):
        enc.transform([[0, 2]])


def test_certifier_matches_exhaustive():
    C = build_code(sample_matrix(uniform_ensemble(4), 3, 4, np.random.default_rng(3)))
    cert = ListRecoveryCertifier(rho=0.25, ell=2, L=3, q=4, mode="exact").fit(C.words)
    ref = max_intersection_exhaustive(C, 0.25, 2)
    assert cert.max_count_ == ref.max_count
    assert cert.is_list_recoverable_ == (ref.max_count <= 3)
    assert cert.predict(C.words).sum() == ref.max_count


def test_certifier_infers_q_and_validates():
    cert = ListRecoveryCertifier(rho=0, ell=1, L=1).fit([[1, 2], [1, 2], [0, 0]])
    assert cert.q_ == 3 and cert.max_count_ == 2 and not cert.is_list_recoverable_
    with pytest.raises(ValueError):
        cert.predict([[1, 2, 0]])
    with pytest.raises(ValueError):
        ListRecoveryCertifier(q=2).fit([[0, 3]])

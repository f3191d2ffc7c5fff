"""scikit-learn style wrappers.

:class:`APCodeEncoder` is a transformer: ``fit`` samples the permutation
matrix, ``transform`` maps ``(n_samples, k)`` bit arrays to codewords.
:class:`ListRecoveryCertifier` fits on a code (one codeword per row) and
exposes the worst list tuple it found.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .apcode import CodeMultiset, PermMatrix, build_code, encode_many, sample_matrix
from .ensembles import Ensemble, as_generator, parse_ensemble
from .listrecovery import LRParams, coverage, is_list_recoverable


def check_messages(X, k: int) -> np.ndarray:
    """Validate a 2-d array of 0/1 message bits with ``k`` columns."""
    X = check_array(X, dtype=np.int64, ensure_min_samples=1)
    if X.shape[1] != k:
        raise ValueError(f"X has {X.shape[1]} features, but the encoder expects {k}")
    if not np.isin(X, (0, 1)).all():
        raise ValueError("message bits must be 0 or 1")
    return X


def check_codewords(X, q: int | None = None) -> np.ndarray:
    """Validate a 2-d array of symbols, optionally bounded by ``q``."""
    X = check_array(X, dtype=np.int64, ensure_min_samples=1)
    if X.min() < 0:
        raise ValueError("symbols must be non-negative")
    if q is not None and X.max() >= q:
        raise ValueError(f"symbols must be smaller than q={q}")
    return X


def _resolve_ensemble(ensemble) -> Ensemble:
    return parse_ensemble(ensemble) if isinstance(ensemble, str) else ensemble


class APCodeEncoder(TransformerMixin, BaseEstimator):
    """Random alphabet-permutation encoder.

    Parameters
    ----------
    ensemble : str or Ensemble, default="uniform:4"
        Distribution of each matrix entry, as an object or descriptor string.
    k : int, default=4
        Message length in bits.
    n : int, default=8
        Block length.
    random_state : int, Generator or None
        Seed for sampling the matrix.

    Attributes
    ----------
    perm_matrix_ : PermMatrix
    code_ : CodeMultiset
        All ``2^k`` codewords in message order.
    """

    def __init__(self, ensemble="uniform:4", k=4, n=8, random_state=None):
        self.ensemble = ensemble
        self.k = k
        self.n = n
        self.random_state = random_state

    def fit(self, X=None, y=None):
        e = _resolve_ensemble(self.ensemble)
        self.ensemble_ = e
        self.perm_matrix_ = sample_matrix(e, self.k, self.n, as_generator(self.random_state))
        self.code_ = build_code(self.perm_matrix_)
        self.n_features_in_ = self.k
        return self

    @classmethod
    def from_matrix(cls, Pi: PermMatrix) -> "APCodeEncoder":
        enc = cls(ensemble=None, k=Pi.k, n=Pi.n)
        enc.ensemble_ = None
        enc.perm_matrix_ = Pi
        enc.code_ = build_code(Pi)
        enc.n_features_in_ = Pi.k
        return enc

    def transform(self, X):
        check_is_fitted(self, "perm_matrix_")
        return encode_many(self.perm_matrix_, check_messages(X, self.perm_matrix_.k))


class ListRecoveryCertifier(BaseEstimator):
    """Certify ``(rho, ell, L)``-list-recoverability of the code passed to ``fit``.

    ``predict`` flags which rows of ``X`` fall in the worst bad set found.
    """

    def __init__(self, rho=0.0, ell=1, L=1, q=None, mode="auto", trials=200,
                 random_state=None):
        self.rho = rho
        self.ell = ell
        self.L = L
        self.q = q
        self.mode = mode
        self.trials = trials
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_codewords(X, self.q)
        q = self.q if self.q is not None else int(X.max()) + 1
        code = CodeMultiset(X, max(q, self.ell + 1))
        ok, verdict = is_list_recoverable(code, LRParams(self.rho, self.ell, self.L),
                                          mode=self.mode, trials=self.trials,
                                          rng=as_generator(self.random_state))
        self.q_ = code.q
        self.verdict_ = verdict
        self.max_count_ = verdict.max_count
        self.witness_ = verdict.witness
        self.is_list_recoverable_ = ok
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "verdict_")
        X = check_codewords(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return np.array([coverage(row[None, :], self.witness_, self.rho) == 1 for row in X])

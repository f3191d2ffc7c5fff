"""Alphabet-permutation codes.

A :class:`PermMatrix` ``Pi`` holds ``k x n`` permutations.  A message of ``k``
bits starts from the all-zeros word and, for each set bit ``i`` (in order),
applies row ``i`` coordinate-wise.  Message integers map to bits little-endian:
bit ``i`` of ``m`` is the ``i``-th applied row.

Codes are kept as multisets: :class:`CodeMultiset` stores all ``2^k`` words in
message order, duplicates included.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .alphabet import FieldSpec, Permutation, field_add_array
from .ensembles import Ensemble, sample_many
from .errors import CapacityError, DomainError, ValidationError
from .listrecovery import ListTuple, coverage

MAX_K = 24


@dataclass(frozen=True, eq=False)
class PermMatrix:
    """``k x n`` permutations over a common alphabet, as an array ``(k, n, q)``."""

    images: np.ndarray

    def __post_init__(self):
        arr = np.array(self.images, dtype=np.int64)
        if arr.ndim != 3 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValidationError(f"expected a (k, n, q) array with k, n >= 1, got {arr.shape}")
        q = arr.shape[2]
        if not np.array_equal(np.sort(arr, axis=2), np.broadcast_to(np.arange(q), arr.shape)):
            bad = np.argwhere(np.any(np.sort(arr, axis=2) != np.arange(q), axis=2))[0]
            raise ValidationError(f"entry ({bad[0]}, {bad[1]}) is not a permutation")
        arr.setflags(write=False)
        object.__setattr__(self, "images", arr)

    @classmethod
    def from_entries(cls, rows: Sequence[Sequence[Permutation]]) -> "PermMatrix":
        sizes = {p.q for row in rows for p in row}
        if len(sizes) > 1:
            raise ValidationError(f"entries mix alphabet sizes {sorted(sizes)}")
        return cls(np.array([[p.images for p in row] for row in rows]))

    @property
    def k(self) -> int:
        return self.images.shape[0]

    @property
    def n(self) -> int:
        return self.images.shape[1]

    @property
    def q(self) -> int:
        return self.images.shape[2]

    def entry(self, i: int, j: int) -> Permutation:
        return Permutation(self.images[i, j])

    def __eq__(self, other):
        if not isinstance(other, PermMatrix):
            return NotImplemented
        return np.array_equal(self.images, other.images)


@dataclass(frozen=True, eq=False)
class CodeMultiset:
    """Codewords (rows of ``words``) with multiplicity.

    ``k`` is recorded when the multiset is the image of a ``k``-row matrix, in
    which case ``len(words) == 2 ** k`` and row ``m`` encodes message ``m``.
    """

    words: np.ndarray
    q: int
    k: int | None = None

    def __post_init__(self):
        words = np.array(self.words, dtype=np.int64)
        if words.ndim != 2 or words.shape[1] < 1:
            raise ValidationError(f"codewords must form a (size, n) array, got {words.shape}")
        if words.size and (words.min() < 0 or words.max() >= self.q):
            raise ValidationError(f"codeword symbols must lie in [0, {self.q})")
        if self.k is not None and words.shape[0] != 1 << self.k:
            raise ValidationError(f"expected {1 << self.k} words for k={self.k}, "
                                  f"got {words.shape[0]}")
        words.setflags(write=False)
        object.__setattr__(self, "words", words)

    @property
    def n(self) -> int:
        return self.words.shape[1]

    def __len__(self):
        return self.words.shape[0]

    def counts(self) -> Counter:
        return Counter(map(tuple, self.words.tolist()))

    def same_multiset(self, other) -> bool:
        other_words = getattr(other, "words", other)
        return self.counts() == Counter(map(tuple, np.asarray(other_words).tolist()))

    def union(self, other: "CodeMultiset") -> "CodeMultiset":
        """Multiset union (concatenation; multiplicities add)."""
        k = self.k + 1 if self.k is not None and self.k == other.k else None
        return CodeMultiset(np.concatenate([self.words, other.words]), self.q, k)

    def image(self, perms) -> "CodeMultiset":
        """Apply one permutation per coordinate to every word."""
        perms = np.asarray([getattr(p, "images", p) for p in perms], dtype=np.int64)
        cols = np.arange(self.n)
        return CodeMultiset(perms[cols[None, :], self.words], self.q, self.k)


def message_bits(m: int, k: int) -> tuple[int, ...]:
    """Little-endian bits of message integer ``m``."""
    return tuple((m >> i) & 1 for i in range(k))


def message_value(bits: Sequence[int]) -> int:
    return sum(int(b) << i for i, b in enumerate(bits))


def encode(Pi: PermMatrix, z: Sequence[int]) -> tuple[int, ...]:
    if len(z) != Pi.k:
        raise DomainError(f"message has {len(z)} bits, matrix has k={Pi.k} rows")
    if any(b not in (0, 1) for b in z):
        raise DomainError("message bits must be 0 or 1")
    cols = np.arange(Pi.n)
    y = np.zeros(Pi.n, dtype=np.int64)
    for i, bit in enumerate(z):
        if bit:
            y = Pi.images[i, cols, y]
    return tuple(y.tolist())


def _check_k(k: int) -> None:
    if k > MAX_K:
        raise CapacityError(f"2^{k} codewords exceeds the cap 2^{MAX_K}", size=1 << k,
                            bound=1 << MAX_K)


def encode_many(Pi: PermMatrix, messages: np.ndarray) -> np.ndarray:
    """Encode a ``(count, k)`` 0/1 array of messages to a ``(count, n)`` array."""
    messages = np.asarray(messages)
    cols = np.arange(Pi.n)
    Y = np.zeros((messages.shape[0], Pi.n), dtype=np.int64)
    for i in range(Pi.k):
        sel = messages[:, i].astype(bool)
        Y[sel] = Pi.images[i, cols[None, :], Y[sel]]
    return Y


def build_code(Pi: PermMatrix) -> CodeMultiset:
    """All ``2^k`` codewords, row ``m`` = ``encode(Pi, message_bits(m, k))``."""
    _check_k(Pi.k)
    m = np.arange(1 << Pi.k, dtype=np.int64)
    bits = (m[:, None] >> np.arange(Pi.k)) & 1
    return CodeMultiset(encode_many(Pi, bits), Pi.q, Pi.k)


def generating_sequence(Pi: PermMatrix) -> list[CodeMultiset]:
    """``C_0 = {0^n}``, ``C_i = C_{i-1} ∪ Pi_i(C_{i-1})``; ``C_k`` is the code."""
    _check_k(Pi.k)
    cols = np.arange(Pi.n)
    words = np.zeros((1, Pi.n), dtype=np.int64)
    seq = [CodeMultiset(words, Pi.q, 0)]
    for i in range(Pi.k):
        words = np.concatenate([words, Pi.images[i, cols[None, :], words]])
        seq.append(CodeMultiset(words, Pi.q, i + 1))
    return seq


def sample_matrix(e: Ensemble, k: int, n: int, rng) -> PermMatrix:
    """``k * n`` independent draws from ``e``, filled row-major."""
    if k < 1 or n < 1:
        raise DomainError("k and n must be >= 1")
    return PermMatrix(sample_many(e, rng, k * n).reshape(k, n, e.q))


def additive_matrix(G, spec: FieldSpec) -> PermMatrix:
    """Shifts ``Pi[i, j](z) = z + G[i, j]``; the code is ``{xG : x in F_2^k}``."""
    G = np.asarray(G, dtype=np.int64)
    if G.ndim != 2:
        raise ValidationError(f"G must be a k x n array, got shape {G.shape}")
    if G.size and (G.min() < 0 or G.max() >= spec.q):
        raise ValidationError(f"G entries must lie in [0, {spec.q})")
    z = np.arange(spec.q, dtype=np.int64)
    return PermMatrix(field_add_array(G[:, :, None], z[None, None, :], spec))


def intersection_count(C: CodeMultiset, B: ListTuple, rho) -> int:
    """``|C ∩ B|`` with multiset semantics: messages whose codeword ``B`` covers."""
    if B.q is not None and B.q != C.q:
        raise DomainError(f"list tuple over q={B.q} but code over q={C.q}")
    return coverage(C, B, rho)

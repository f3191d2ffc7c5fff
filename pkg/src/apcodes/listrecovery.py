"""Bad sets, list-recovery certification and the capacity/rate formulas.

A bad set is parameterised by a :class:`ListTuple` ``(Z_1, ..., Z_n)`` of
``ell``-subsets of the alphabet; a word is covered when it misses its lists in
at most ``floor(rho * n)`` coordinates.  Codes are duck-typed: anything with a
``words`` array of shape ``(size, n)`` and an alphabet size ``q`` works.

All tuple spaces are enumerated in one canonical order: each coordinate's
candidate lists in lexicographic order, coordinate 0 most significant.  The
first maximiser in that order is the reported witness, which makes it the
lexicographically smallest one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .errors import CapacityError, DomainError, InfeasibleParametersError, ParameterError, \
    ValidationError

EXHAUSTIVE_CAP = 10 ** 7
_CHUNK_CELLS = 1 << 21


def radius(rho, n: int) -> int:
    """Largest admissible number of mismatches, ``floor(rho * n)``."""
    if isinstance(rho, Fraction):
        return math.floor(rho * n)
    # guard against 0.29 * 100 = 28.999999999999996
    return math.floor(rho * n + 1e-9)


@dataclass(frozen=True)
class ListTuple:
    """Per-coordinate lists ``Z_1, ..., Z_n``, each a sorted tuple of ``ell`` symbols."""

    Z: tuple[tuple[int, ...], ...]
    q: int | None = None

    def __post_init__(self):
        lists = tuple(tuple(sorted(int(s) for s in z)) for z in self.Z)
        if not lists:
            raise ValidationError("a list tuple needs at least one coordinate")
        ell = len(lists[0])
        for i, z in enumerate(lists):
            if len(z) != ell or len(set(z)) != ell:
                raise ValidationError(f"coordinate {i} has a list of size {len(set(z))}, "
                                      f"expected {ell} distinct symbols")
            if self.q is not None and any(not 0 <= s < self.q for s in z):
                raise ValidationError(f"coordinate {i} lists a symbol outside [0, {self.q})")
        if ell < 1:
            raise ValidationError("lists must be non-empty")
        if self.q is not None and ell >= self.q:
            raise ValidationError(f"list size {ell} must be smaller than q={self.q}")
        object.__setattr__(self, "Z", lists)

    @property
    def n(self) -> int:
        return len(self.Z)

    @property
    def ell(self) -> int:
        return len(self.Z[0])

    def image(self, perms) -> "ListTuple":
        """Apply one permutation per coordinate: ``(pi_1(Z_1), ..., pi_n(Z_n))``."""
        perms = np.asarray([getattr(p, "images", p) for p in perms])
        return ListTuple(tuple(tuple(perms[i][list(z)].tolist()) for i, z in enumerate(self.Z)),
                         self.q)

    def tolist(self) -> list[list[int]]:
        return [list(z) for z in self.Z]


class LRParams(NamedTuple):
    rho: float
    ell: int
    L: int


@dataclass(frozen=True)
class LRVerdict:
    max_count: int
    witness: ListTuple | None
    exhaustive: bool


def covers(B: ListTuple, x: Sequence[int], rho) -> bool:
    if len(x) != B.n:
        raise DomainError(f"word length {len(x)} does not match list tuple length {B.n}")
    misses = sum(1 for xi, z in zip(x, B.Z) if int(xi) not in z)
    return misses <= radius(rho, B.n)


def _words(C) -> np.ndarray:
    return np.asarray(getattr(C, "words", C), dtype=np.int64)


def coverage(C, B: ListTuple, rho) -> int:
    """Number of codewords (with multiplicity) covered by ``B``."""
    words = _words(C)
    if words.shape[1] != B.n:
        raise DomainError(f"code length {words.shape[1]} does not match list tuple length {B.n}")
    hit = np.zeros(words.shape[0], dtype=np.int64)
    for i, z in enumerate(B.Z):
        hit += np.isin(words[:, i], z)
    return int(np.count_nonzero(hit >= B.n - radius(rho, B.n)))


def _check_ell(q: int, ell: int) -> None:
    if not 1 <= ell < q:
        raise DomainError(f"list size ell={ell} must satisfy 1 <= ell < q={q}")


def full_candidates(q: int, ell: int, n: int) -> list[np.ndarray]:
    """Every ``ell``-subset of the alphabet, for each coordinate."""
    subsets = np.array(list(combinations(range(q), ell)), dtype=np.int64)
    return [subsets] * n


def column_candidates(words: np.ndarray, q: int, ell: int) -> list[np.ndarray]:
    """Lists drawn from symbols that actually occur in each column.

    When a column has at most ``ell`` distinct symbols it gets a single list,
    padded with the smallest absent symbols.  Swapping an absent symbol for a
    present one never lowers coverage, so the maximum is unchanged.
    """
    out = []
    for i in range(words.shape[1]):
        present = np.unique(words[:, i]).tolist()
        if len(present) <= ell:
            pad = [s for s in range(q) if s not in present][: ell - len(present)]
            out.append(np.array([sorted(present + pad)], dtype=np.int64))
        else:
            out.append(np.array(list(combinations(present, ell)), dtype=np.int64))
    return out


def _tuple_space(candidates: list[np.ndarray]) -> int:
    return math.prod(len(c) for c in candidates)


def iter_tuple_counts(words: np.ndarray, candidates: list[np.ndarray], r: int
                      ) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(start, counts)`` blocks of coverage counts in canonical tuple order."""
    n = words.shape[1]
    shape = tuple(len(c) for c in candidates)
    total = math.prod(shape)
    member = [
        (words[:, i][None, :, None] == cand[:, None, :]).any(axis=2).astype(np.int16)
        for i, cand in enumerate(candidates)
    ]
    chunk = max(1, _CHUNK_CELLS // max(1, words.shape[0]))
    need = n - r
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        digits = np.unravel_index(idx, shape)
        hits = member[0][digits[0]].copy()
        for i in range(1, n):
            hits += member[i][digits[i]]
        yield start, np.count_nonzero(hits >= need, axis=1)


def all_tuple_counts(C, rho, ell: int, q: int | None = None, cap: int = EXHAUSTIVE_CAP
                     ) -> np.ndarray:
    """Coverage count of every tuple of the full space ``C(q, ell)^n``, canonical order."""
    words = _words(C)
    q = q if q is not None else C.q
    _check_ell(q, ell)
    cand = full_candidates(q, ell, words.shape[1])
    total = _tuple_space(cand)
    if total > cap:
        raise CapacityError(f"tuple space {total} exceeds the cap {cap}", size=total, bound=cap)
    out = np.empty(total, dtype=np.int64)
    for start, counts in iter_tuple_counts(words, cand, radius(rho, words.shape[1])):
        out[start:start + counts.size] = counts
    return out


def _search(words, candidates, r, q) -> tuple[int, ListTuple]:
    best, best_idx = -1, 0
    for start, counts in iter_tuple_counts(words, candidates, r):
        j = int(np.argmax(counts))
        if counts[j] > best:
            best, best_idx = int(counts[j]), start + j
    digits = np.unravel_index(best_idx, tuple(len(c) for c in candidates))
    witness = ListTuple(tuple(tuple(candidates[i][d].tolist()) for i, d in enumerate(digits)), q)
    return best, witness


def max_intersection_exhaustive(C, rho, ell: int, cap: int = EXHAUSTIVE_CAP) -> LRVerdict:
    """Exact maximum coverage over all list tuples (column-restricted search)."""
    words = _words(C)
    q = C.q
    _check_ell(q, ell)
    cand = column_candidates(words, q, ell)
    total = _tuple_space(cand)
    if total > cap:
        raise CapacityError(
            f"restricted tuple space {total} exceeds the cap {cap}; "
            "use max_intersection_randomized instead", size=total, bound=cap)
    best, witness = _search(words, cand, radius(rho, words.shape[1]), q)
    return LRVerdict(best, witness, True)


def max_intersection_naive(C, rho, ell: int) -> tuple[LRVerdict, int]:
    """Reference enumerator over all ``C(q, ell)^n`` tuples, in plain Python.

    Returns the verdict and the number of tuples visited.  Kept deliberately
    free of the vectorised machinery so it can serve as an oracle.
    """
    words = [tuple(int(s) for s in w) for w in _words(C).tolist()]
    q = C.q
    _check_ell(q, ell)
    n = len(words[0])
    r = radius(rho, n)
    subsets = [frozenset(s) for s in combinations(range(q), ell)]
    best, witness, visited = -1, None, 0
    for lists in product(subsets, repeat=n):
        visited += 1
        count = 0
        for w in words:
            if sum(1 for s, z in zip(w, lists) if s not in z) <= r:
                count += 1
        if count > best:
            best, witness = count, lists
    return LRVerdict(best, ListTuple(tuple(tuple(z) for z in witness), q), True), visited


def max_intersection_randomized(C, rho, ell: int, trials: int, rng=None,
                                L: int | None = None) -> LRVerdict:
    """Lower-bound witness search by seeded greedy construction plus hill climbing.

    Each trial picks ``L + 1`` codewords (``ell + 1`` when ``L`` is not given),
    takes the ``ell`` most frequent symbols of the picked words in every
    coordinate (lowest symbol wins ties), then applies improving single-symbol
    swaps until none is left.
    """
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    words = _words(C)
    q = C.q
    _check_ell(q, ell)
    size, n = words.shape
    r = radius(rho, n)
    pick = min(size, (L if L is not None else ell) + 1)
    symbols = np.arange(q)
    best, best_lists = -1, None
    for _ in range(trials):
        chosen = words[rng.choice(size, size=pick, replace=False)]
        lists = []
        for i in range(n):
            freq = np.bincount(chosen[:, i], minlength=q)
            order = np.lexsort((symbols, -freq))
            lists.append(set(order[:ell].tolist()))
        miss = np.zeros(size, dtype=np.int64)
        for i in range(n):
            miss += ~np.isin(words[:, i], list(lists[i]))
        count = int(np.count_nonzero(miss <= r))
        improved = True
        while improved:
            improved = False
            for i in range(n):
                col = words[:, i]
                for s in sorted(lists[i]):
                    for t in range(q):
                        if t in lists[i]:
                            continue
                        trial_miss = miss + (col == s) - (col == t)
                        c = int(np.count_nonzero(trial_miss <= r))
                        if c > count:
                            lists[i].remove(s)
                            lists[i].add(t)
                            miss, count, improved = trial_miss, c, True
                            break
                    if improved:
                        break
                if improved:
                    break
        if count > best:
            best, best_lists = count, [tuple(sorted(z)) for z in lists]
    return LRVerdict(best, ListTuple(tuple(best_lists), q), False)


def is_list_recoverable(C, params: LRParams, mode: str = "auto", trials: int = 200,
                        rng=None) -> tuple[bool, LRVerdict]:
    """``(max_count <= L, verdict)``; the verdict is flagged non-exhaustive when
    the randomized search was used, in which case ``True`` only means that no
    witness was found."""
    rho, ell, L = params
    if mode not in ("auto", "exact", "random"):
        raise ParameterError(f"unknown mode {mode!r}")
    if mode != "random":
        try:
            verdict = max_intersection_exhaustive(C, rho, ell)
        except CapacityError:
            if mode == "exact":
                raise
            verdict = max_intersection_randomized(C, rho, ell, trials, rng, L=L)
    else:
        verdict = max_intersection_randomized(C, rho, ell, trials, rng, L=L)
    return verdict.max_count <= L, verdict


def _xlogy_ratio(x: float, num: float, den: float) -> float:
    # x * ln(num / den) with 0 * ln(./0) := 0
    if x == 0:
        return 0.0
    return x * (math.log(num) - math.log(den))


def capacity(q: int, ell: int, rho: float) -> float:
    """List-recovery capacity ``h*_{q,ell}(rho)``."""
    _check_ell(q, ell)
    if not 0 <= rho <= 1:
        raise DomainError(f"rho={rho} outside [0, 1]")
    if rho > 1 - ell / q:
        return 1.0
    value = _xlogy_ratio(rho, q - ell, rho) + _xlogy_ratio(1 - rho, ell, 1 - rho)
    # the maximum is 1, reached at rho = 1 - ell/q; rounding can overshoot it
    return min(value / math.log(q), 1.0)


def eta_min(q: int, n: int) -> float:
    """Smallest admissible rate slack, ``2 log_q(2n / ln 2) / n``."""
    if q < 2 or n < 1:
        raise DomainError("need q >= 2 and n >= 1")
    return 2 * math.log(2 * n / math.log(2), q) / n


class RateInfo(NamedTuple):
    R: float
    k: int
    k_exact: float
    integral: bool


def rate_and_k(q: int, ell: int, rho: float, L: int, n: int, eta: float | None = None
               ) -> RateInfo:
    """Guaranteed rate ``R`` and message length ``k = floor(R log2(q) n)``.

    ``eta=None`` uses :func:`eta_min`.  ``integral`` reports whether
    ``R log2(q) n`` was already an integer.
    """
    lo = eta_min(q, n)
    if eta is None:
        eta = lo
    if eta < lo - 1e-15:
        raise ParameterError(f"eta={eta} is below eta_min(q={q}, n={n}) = {lo}")
    list_term = (math.log(math.comb(q, ell), q) + 1 / n) / (L + 1)
    R = 1 - capacity(q, ell, rho) - list_term - eta
    if R <= 0:
        raise InfeasibleParametersError(
            f"non-positive rate R={R:.6g} for q={q}, ell={ell}, rho={rho}, L={L}, n={n}, "
            f"eta={eta:.6g}", deficit=-R)
    k_exact = R * math.log2(q) * n
    k = math.floor(k_exact + 1e-9)
    if k < 1:
        raise InfeasibleParametersError(
            f"rate R={R:.6g} gives k < 1 at n={n}", deficit=1 / (math.log2(q) * n) - R)
    return RateInfo(R, k, k_exact, abs(k_exact - round(k_exact)) < 1e-9)

"""Executable checks for the potential-function argument.

For a code ``C`` and list parameters the potential is

    K_C = mean over tuples B of  q ** (|C ∩ B| * alpha * n),

with ``B`` uniform over the ``C(q, ell)^n`` list tuples and
``alpha = (log_q |B| + 1) / ((L + 1) n)``.  Everything is computed from the
histogram of intersection counts and kept in natural-log space; a linear value
is only materialised below ``1e300``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, combinations_with_replacement, product

import numpy as np
from scipy.special import logsumexp

from .apcode import CodeMultiset
from .ensembles import Ensemble, as_generator, sample_many, support_arrays
from .errors import CapacityError, DomainError, ParameterError
from .listrecovery import (
    EXHAUSTIVE_CAP,
    ListTuple,
    all_tuple_counts,
    capacity,
    max_intersection_exhaustive,
    radius,
    rate_and_k,
)

LINEAR_LIMIT = 1e300
RECURRENCE_CAP = 10 ** 6
MIXING_CAP = 10 ** 6
MIXING_SCAN_CAP = 10 ** 4


@dataclass(frozen=True)
class PotentialParams:
    q: int
    n: int
    ell: int
    L: int
    rho: float
    alpha: float
    beta: float
    log_q_B: float

    @property
    def tuple_space(self) -> int:
        return math.comb(self.q, self.ell) ** self.n

    @property
    def log_weight(self) -> float:
        """Natural log of ``q ** (alpha * n)``, the factor one covered word contributes."""
        return self.alpha * self.n * math.log(self.q)


def make_params(q: int, n: int, ell: int, L: int, rho: float) -> PotentialParams:
    if not 1 <= ell < q:
        raise DomainError(f"list size ell={ell} must satisfy 1 <= ell < q={q}")
    if n < 1 or L < 0:
        raise DomainError("need n >= 1 and L >= 0")
    log_q_B = n * math.log(math.comb(q, ell)) / math.log(q)
    alpha = (log_q_B + 1) / ((L + 1) * n)
    return PotentialParams(q, n, ell, L, rho, alpha, capacity(q, ell, rho), log_q_B)


@dataclass(frozen=True)
class PotentialValue:
    log_K: float
    mode: str
    trials: int | None = None

    @property
    def K(self) -> float | None:
        return math.exp(self.log_K) if self.log_K < math.log(LINEAR_LIMIT) else None


def _log_mean_weight(counts: np.ndarray, p: PotentialParams) -> float:
    hist = np.bincount(counts)
    nz = np.nonzero(hist)[0]
    return float(logsumexp(nz * p.log_weight, b=hist[nz]) - math.log(counts.size))


def tuple_counts(C: CodeMultiset, p: PotentialParams) -> np.ndarray:
    if C.n != p.n or C.q != p.q:
        raise DomainError(f"code (q={C.q}, n={C.n}) does not match parameters "
                          f"(q={p.q}, n={p.n})")
    return all_tuple_counts(C, p.rho, p.ell, q=p.q)


def potential_K(C: CodeMultiset, p: PotentialParams, mode: str = "exact",
                trials: int | None = None, rng=None) -> PotentialValue:
    """The potential ``K_C``; ``sampled`` mode averages over random tuples."""
    if mode == "exact":
        return PotentialValue(_log_mean_weight(tuple_counts(C, p), p), "exact")
    if mode not in ("sampled", "sample"):
        raise ParameterError(f"unknown mode {mode!r}")
    if trials is None or trials < 1:
        raise ParameterError("sampled mode needs trials >= 1")
    rng = as_generator(rng)
    keys = rng.random((trials, p.n, p.q))
    lists = np.argsort(keys, axis=2)[:, :, : p.ell]
    member = (C.words[None, :, :, None] == lists[:, None, :, :]).any(axis=3)
    counts = np.count_nonzero(member.sum(axis=2) >= p.n - radius(p.rho, p.n), axis=1)
    return PotentialValue(_log_mean_weight(counts, p), "sampled", trials)


def check_small_potential_lemma(C: CodeMultiset, p: PotentialParams) -> bool:
    """Both directions of the small-potential lemma on one code.

    ``K_C < 2`` must force every intersection to be at most ``L``, and an
    intersection of ``L + 1`` or more must force ``K_C >= q``.
    """
    log_K = potential_K(C, p).log_K
    big = max_intersection_exhaustive(C, p.rho, p.ell).max_count
    small_ok = not (log_K < math.log(2)) or big <= p.L
    large_ok = big < p.L + 1 or log_K >= math.log(p.q) - 1e-12 * max(1.0, math.log(p.q))
    return small_ok and large_ok


@dataclass(frozen=True)
class RecurrenceResult:
    """Expected next potential against the squared current one.

    ``log_lhs`` averages per map first; ``log_lhs_swapped`` averages per tuple
    first.  The two agree when the order of expectation does not matter.
    """

    log_lhs: float
    log_rhs: float
    log_lhs_swapped: float
    image_deviation: float
    lower_step_ok: bool
    maps: int

    @property
    def lhs(self) -> float:
        return math.exp(self.log_lhs)

    @property
    def rhs(self) -> float:
        return math.exp(self.log_rhs)


def verify_recurrence(C_prev: CodeMultiset, e: Ensemble, p: PotentialParams
                      ) -> RecurrenceResult:
    """Exact ``E_tau[K(C ∪ tau(C))]`` over the full product support of ``e``.

    Also records ``max |log K(tau C) - log K(C)|`` over the maps and whether
    ``K(C ∪ tau C) >= 2 K(C) - 1`` held for every map.
    """
    perms, probs = support_arrays(e)
    maps = perms.shape[0] ** p.n
    if maps > RECURRENCE_CAP:
        raise CapacityError(f"product support {maps} exceeds the cap {RECURRENCE_CAP}",
                            size=maps, bound=RECURRENCE_CAP)
    if p.tuple_space > EXHAUSTIVE_CAP:
        raise CapacityError(f"tuple space {p.tuple_space} exceeds the cap {EXHAUSTIVE_CAP}",
                            size=p.tuple_space, bound=EXHAUSTIVE_CAP)
    w = p.log_weight
    log_T = math.log(p.tuple_space)
    base = tuple_counts(C_prev, p)
    log_K_prev = _log_mean_weight(base, p)
    per_map, log_probs = [], []
    inner = np.full(base.size, -np.inf)
    deviation, lower_ok = 0.0, True
    log_probs_support = np.log(probs)
    for choice in product(range(perms.shape[0]), repeat=p.n):
        moved = tuple_counts(C_prev.image(perms[list(choice)]), p)
        log_pr = float(log_probs_support[list(choice)].sum())
        log_K_union = float(logsumexp((base + moved) * w) - log_T)
        per_map.append(log_K_union)
        log_probs.append(log_pr)
        inner = np.logaddexp(inner, log_pr + moved * w)
        deviation = max(deviation, abs(_log_mean_weight(moved, p) - log_K_prev))
        # K(C ∪ tau C) >= 1 + 2 (K(C) - 1)
        lower = math.log1p(2 * math.expm1(log_K_prev)) if log_K_prev < 700 else \
            math.log(2) + log_K_prev
        lower_ok &= log_K_union >= lower - 1e-12 * max(1.0, abs(lower))
    log_lhs = float(logsumexp(np.array(per_map) + np.array(log_probs)))
    log_swapped = float(logsumexp(base * w + inner) - log_T)
    return RecurrenceResult(log_lhs, 2 * log_K_prev, log_swapped, deviation, lower_ok, maps)


@dataclass(frozen=True)
class MixingReport:
    """Closure and uniformity of images of bad sets under the power ensemble.

    ``condition2_tv`` is the canonical-``B`` distance to uniform over tuples for
    sampled mode, and the worst distance over scanned source tuples in exact
    mode.  ``scanned`` is false when only the canonical tuple was checked.
    """

    condition1_ok: bool
    condition2_tv: float
    mode: str
    worst_B: ListTuple
    canonical_tv: float
    scanned: bool
    trials: int | None = None


def _subset_ranks(q: int, ell: int):
    subsets = list(combinations(range(q), ell))
    radix = q ** np.arange(ell - 1, -1, -1, dtype=np.int64)
    keys = np.array(subsets, dtype=np.int64) @ radix
    return subsets, keys, radix


def _rank_images(images: np.ndarray, keys: np.ndarray, radix: np.ndarray) -> np.ndarray:
    """Index (in lexicographic order of subsets) of each sorted row of ``images``."""
    return np.searchsorted(keys, np.sort(images, axis=-1) @ radix)


def _product_tv(dists: list[np.ndarray]) -> float:
    joint = dists[0]
    for d in dists[1:]:
        joint = np.multiply.outer(joint, d)
    return float(0.5 * np.abs(joint - 1.0 / joint.size).sum())


def test_mixing(e: Ensemble, n: int, rho, ell: int, mode: str = "exact",
                trials: int | None = None, rng=None, closure_samples: int = 64
                ) -> MixingReport:
    """Check both mixing conditions for the ``n``-fold power of ``e`` on ell-lists.

    The image of a tuple under ``(pi_1, ..., pi_n)`` is ``(pi_1(Z_1), ...,
    pi_n(Z_n))``.  Its law is the product of per-coordinate laws, so exact mode
    builds the joint distribution from those factors.  Source tuples are scanned
    up to reordering of coordinates when the tuple space is at most ``1e4``.
    ``rho`` leaves the set of list tuples unchanged and is accepted so the
    call mirrors the other list-recovery entry points.
    """
    q = e.q
    if not 1 <= ell < q:
        raise DomainError(f"list size ell={ell} must satisfy 1 <= ell < q={q}")
    M = math.comb(q, ell)
    space = M ** n
    subsets, keys, radix = _subset_ranks(q, ell)
    canonical = ListTuple(tuple(tuple(range(ell)) for _ in range(n)), q)
    gen = as_generator(rng if rng is not None else 0)

    # condition 1: direct image computation on sampled tuples
    draws = sample_many(e, gen, closure_samples * n).reshape(closure_samples, n, q)
    closure_ok = True
    for t in range(closure_samples):
        src = ListTuple(tuple(subsets[j] for j in gen.integers(0, M, size=n)), q)
        img = src.image(draws[t])  # ListTuple validates sizes and range
        closure_ok &= img.n == n and img.ell == ell

    if mode == "exact":
        if space > MIXING_CAP:
            raise CapacityError(f"tuple space {space} exceeds the cap {MIXING_CAP}",
                                size=space, bound=MIXING_CAP)
        perms, probs = support_arrays(e)
        per_subset = np.stack([
            np.bincount(_rank_images(perms[:, list(z)], keys, radix), weights=probs, minlength=M)
            for z in subsets
        ]) if space <= MIXING_SCAN_CAP else None
        if per_subset is None:
            dist = np.bincount(_rank_images(perms[:, list(range(ell))], keys, radix),
                               weights=probs, minlength=M)
            tv = _product_tv([dist] * n)
            return MixingReport(closure_ok, tv, "exact", canonical, tv, False)
        canonical_tv = _product_tv([per_subset[0]] * n)
        worst_tv, worst = -1.0, None
        for combo in combinations_with_replacement(range(M), n):
            tv = _product_tv([per_subset[j] for j in combo])
            if tv > worst_tv:
                worst_tv, worst = tv, combo
        worst_B = ListTuple(tuple(subsets[j] for j in worst), q)
        return MixingReport(closure_ok, worst_tv, "exact", worst_B, canonical_tv, True)

    if mode not in ("sampled", "sample"):
        raise ParameterError(f"unknown mode {mode!r}")
    if trials is None or trials < 1:
        raise ParameterError("sampled mode needs trials >= 1")
    draws = sample_many(e, gen, trials * n).reshape(trials, n, q)
    ranks = _rank_images(draws[:, :, :ell], keys, radix)  # (trials, n)
    cell = ranks @ (M ** np.arange(n - 1, -1, -1, dtype=np.int64)) if space < 2 ** 62 else None
    if cell is None:
        raise CapacityError("tuple space too large to index", size=space, bound=2 ** 62)
    _, counts = np.unique(cell, return_counts=True)
    freq = counts / trials
    tv = 0.5 * (np.abs(freq - 1.0 / space).sum() + (space - freq.size) / space)
    return MixingReport(closure_ok, float(tv), "sampled", canonical, float(tv), False, trials)


test_mixing.__test__ = False


@dataclass(frozen=True)
class LambdaTrace:
    lambda_: tuple[float, ...]
    log_lambda: tuple[float, ...]
    bound_ok: bool

    @property
    def lambda_k(self) -> float:
        return self.lambda_[-1]


def _safe_exp(x: float) -> float:
    return math.exp(x) if x < 709 else math.inf


def lambda_trace(lambda0: float, k: int) -> LambdaTrace:
    """``lambda_i = 2 lambda_{i-1} + lambda_{i-1} ** 1.5`` and the check
    ``lambda_k <= 2 ** (k + 1) * lambda_0`` (evaluated in log space)."""
    if lambda0 < 0:
        raise DomainError(f"lambda0 must be >= 0, got {lambda0}")
    if k < 0:
        raise DomainError(f"k must be >= 0, got {k}")
    if lambda0 == 0:
        return LambdaTrace((0.0,) * (k + 1), (-math.inf,) * (k + 1), True)
    logs = [math.log(lambda0)]
    lin = [float(lambda0)]
    for _ in range(k):
        prev = logs[-1]
        logs.append(prev + float(np.logaddexp(math.log(2), 0.5 * prev)))
        x = lin[-1]
        lin.append(2 * x + x ** 1.5 if x < 1e200 else _safe_exp(logs[-1]))
    if math.isfinite(lin[-1]):
        bound_ok = lin[-1] <= 2 ** (k + 1) * lambda0
    else:
        bound_ok = logs[-1] <= (k + 1) * math.log(2) + logs[0]
    return LambdaTrace(tuple(lin), tuple(logs), bound_ok)


def theorem_lambda_trace(q: int, n: int, ell: int, L: int, rho: float,
                         eta: float | None = None) -> tuple[LambdaTrace, int]:
    """Trace started at ``q ** (n (alpha + beta - 1))`` with ``k`` from the rate formula."""
    p = make_params(q, n, ell, L, rho)
    k = rate_and_k(q, ell, rho, L, n, eta).k
    lambda0 = math.exp(n * (p.alpha + p.beta - 1) * math.log(q))
    return lambda_trace(lambda0, k), k


def zero_membership_probability(q: int, n: int, ell: int, rho) -> float:
    """Exact probability that a uniform list tuple covers the all-zeros word.

    Each coordinate list contains 0 with probability ``ell / q`` independently,
    so this is a binomial tail.
    """
    if not 1 <= ell < q:
        raise DomainError(f"list size ell={ell} must satisfy 1 <= ell < q={q}")
    p = Fraction(ell, q)
    need = n - radius(rho, n)
    tail = sum(math.comb(n, j) * p ** j * (1 - p) ** (n - j) for j in range(max(need, 0), n + 1))
    return float(tail)


def zero_membership_bound(q: int, n: int, ell: int, rho) -> float:
    """``q ** ((beta - 1) n)`` with ``beta`` the list-recovery capacity."""
    return q ** ((capacity(q, ell, float(rho)) - 1) * n)


def first_element_bound(p: PotentialParams) -> float:
    """Upper bound ``1 + q ** (n (alpha + beta - 1))`` on the singleton potential."""
    return 1 + p.q ** (p.n * (p.alpha + p.beta - 1))


def singleton_potential_closed_form(p: PotentialParams) -> float:
    """``1 + Pr[0 covered] * (q ** (alpha n) - 1)`` for the code ``{0^n}``."""
    pr = zero_membership_probability(p.q, p.n, p.ell, p.rho)
    return 1 + pr * math.expm1(p.log_weight)


@dataclass(frozen=True)
class FailureBound:
    value: float
    raw: float
    vacuous: bool


def failure_bound(q: int, k: int, n: int, eta: float) -> FailureBound:
    """``sqrt(2) k q ** (-eta n / 2)``, clamped to ``[0, 1]``."""
    if q < 2 or k < 1 or n < 1 or eta <= 0:
        raise DomainError("failure_bound needs q >= 2, k >= 1, n >= 1 and eta > 0")
    raw = math.sqrt(2) * k * q ** (-eta * n / 2)
    return FailureBound(min(raw, 1.0), raw, raw >= 1.0)


"""Distributions over permutations of the alphabet.

Every ensemble is an immutable descriptor.  Sampling takes a caller-owned
:class:`numpy.random.Generator`; the algebraic families (additive shifts,
affine maps, fractional-linear maps of the projective line) sample a uniform
index into their support and decode it, so :func:`enumerate_support` and
:func:`sample` agree on the distribution by construction.

``swap_or_not`` is a concrete small-seed family standing in for an
approximately k-wise independent family.  Its independence slack is
measured with :func:`test_independence`, never assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property
from itertools import permutations, product
from typing import Sequence

import numpy as np

from .alphabet import (
    FieldSpec,
    Permutation,
    field_add_array,
    field_inv_array,
    field_mul_array,
)
from .errors import APCodeError, CapacityError, DomainError, ParameterError, ValidationError

SUPPORT_CAP = 10 ** 5
EXACT_DOMAIN_CAP = 10 ** 6
UNIFORM_ENUM_MAX_Q = 8

KINDS = ("additive", "affine", "fractional_linear", "uniform", "swap_or_not", "table")


@dataclass(frozen=True, eq=False)
class Ensemble:
    """A sampleable distribution over permutations of ``{0, ..., q-1}``.

    ``claimed_delta`` is 0 for exact families and ``None`` for swap-or-not until
    a measured value is attached with :func:`with_measured_delta`.
    """

    kind: str
    q: int
    spec: FieldSpec | None = None
    rounds: int | None = None
    table: tuple[Permutation, ...] | None = None
    claimed_m: int | None = None
    claimed_delta: float | None = 0.0
    master_seed: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown ensemble kind {self.kind!r}")

    @cached_property
    def _table_array(self) -> np.ndarray:
        arr = np.stack([p.images for p in self.table])
        arr.setflags(write=False)
        return arr

    @cached_property
    def _round_bits(self) -> np.ndarray:
        # Fixed per-family round functions; the master seed selects the family.
        rng = np.random.default_rng(self.master_seed)
        bits = rng.integers(0, 2, size=(self.rounds, self.q), dtype=np.int8)
        bits.setflags(write=False)
        return bits

    def describe(self) -> str:
        if self.kind == "additive":
            return f"additive:{self.spec}"
        if self.kind == "affine":
            return f"affine:{self.spec}"
        if self.kind == "fractional_linear":
            return f"pgl:{self.spec}"
        if self.kind == "uniform":
            return f"uniform:{self.q}"
        if self.kind == "swap_or_not":
            return f"swapnot:{self.q}:{self.rounds}:{self.master_seed}"
        return f"table:<{len(self.table)} permutations>"


@dataclass(frozen=True)
class IndependenceReport:
    m: int
    tv_max: float
    worst_tuple: tuple[int, ...]
    mode: str
    trials: int | None
    domain_size: int


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def additive_ensemble(spec: FieldSpec) -> Ensemble:
    """Uniform additive shifts ``z -> z + a``."""
    return Ensemble("additive", spec.q, spec=spec, claimed_m=1, claimed_delta=0.0)


def affine_ensemble(spec: FieldSpec) -> Ensemble:
    """Uniform affine maps ``z -> a z + b`` with ``a != 0`` (sharply 2-transitive)."""
    return Ensemble("affine", spec.q, spec=spec, claimed_m=2, claimed_delta=0.0)


def fractional_linear_ensemble(spec: FieldSpec) -> Ensemble:
    """Uniform fractional-linear maps on the projective line over ``spec``.

    The alphabet has ``spec.q + 1`` symbols; symbol ``spec.q`` is the point at
    infinity.  The action is sharply 3-transitive.
    """
    return Ensemble("fractional_linear", spec.q + 1, spec=spec, claimed_m=3, claimed_delta=0.0)


def uniform_ensemble(q: int) -> Ensemble:
    if q < 2:
        raise DomainError(f"alphabet size must be >= 2, got {q}")
    return Ensemble("uniform", q, claimed_m=q, claimed_delta=0.0)


def swap_or_not_ensemble(q: int, rounds: int, master_seed: int = 0,
                         claimed_m: int | None = None) -> Ensemble:
    """Swap-or-not shuffle on ``Z_q`` with ``rounds`` rounds.

    A draw picks, per round, a key ``K`` in ``[0, q)`` and a flip bit ``b``.
    Round ``r`` pairs ``x`` with ``K - x mod q`` and swaps when
    ``F_r(max(x, K - x)) xor b`` is set, where the bit tables ``F_r`` are fixed
    by ``master_seed``.  Each round is an involution, so every draw is a
    bijection.
    """
    if rounds < 1:
        raise ParameterError(f"rounds must be >= 1, got {rounds}")
    if q < 2:
        raise DomainError(f"alphabet size must be >= 2, got {q}")
    return Ensemble("swap_or_not", q, rounds=rounds, claimed_m=claimed_m,
                    claimed_delta=None, master_seed=int(master_seed))


def table_ensemble(perms: Sequence[Permutation]) -> Ensemble:
    perms = tuple(p if isinstance(p, Permutation) else Permutation(p) for p in perms)
    if not perms:
        raise ValidationError("table ensemble needs at least one permutation")
    sizes = {p.q for p in perms}
    if len(sizes) != 1:
        raise ValidationError(f"table mixes alphabet sizes {sorted(sizes)}")
    return Ensemble("table", perms[0].q, table=perms, claimed_m=None, claimed_delta=None)


def with_measured_delta(e: Ensemble, m: int, mode: str = "sampled", trials: int = 100_000,
                        rng=None) -> Ensemble:
    """Copy of ``e`` whose ``claimed_m``/``claimed_delta`` come from a measurement."""
    report = test_independence(e, m, mode=mode, trials=trials, rng=rng)
    return replace(e, claimed_m=m, claimed_delta=report.tv_max)


def support_size(e: Ensemble) -> int:
    """Size of the index space a draw is uniform over."""
    q = e.q
    if e.kind == "additive":
        return q
    if e.kind == "affine":
        return q * (q - 1)
    if e.kind == "fractional_linear":
        f = e.spec.q
        return f * (f * f - 1)
    if e.kind == "uniform":
        return math.factorial(q)
    if e.kind == "table":
        return len(e.table)
    return (2 * q) ** e.rounds


def _decode(e: Ensemble, idx: np.ndarray) -> np.ndarray:
    """Map support indices to image arrays for the algebraic families."""
    spec = e.spec
    f = spec.q
    z = np.arange(f, dtype=np.int64)
    if e.kind == "additive":
        return field_add_array(idx[:, None], z[None, :], spec)
    if e.kind == "affine":
        a = idx // f + 1
        b = idx % f
        return field_add_array(field_mul_array(a[:, None], z[None, :], spec), b[:, None], spec)
    # fractional linear: first f(f-1) indices are z -> a z + b, the rest are
    # z -> (a z + b) / (z + d) with b != a d.
    inf = f
    n_affine = f * (f - 1)
    out = np.empty((idx.size, f + 1), dtype=np.int64)
    aff = idx < n_affine
    if aff.any():
        j = idx[aff]
        a, b = j // f + 1, j % f
        out[aff, :f] = field_add_array(field_mul_array(a[:, None], z[None, :], spec),
                                       b[:, None], spec)
        out[aff, f] = inf
    rest = ~aff
    if rest.any():
        j = idx[rest] - n_affine
        ad_index, r = np.divmod(j, f - 1)
        a, d = np.divmod(ad_index, f)
        prod = field_mul_array(a, d, spec)
        b = r + (r >= prod)
        num = field_add_array(field_mul_array(a[:, None], z[None, :], spec), b[:, None], spec)
        den = field_add_array(z[None, :], d[:, None], spec)
        safe = np.where(den == 0, 1, den)
        vals = field_mul_array(num, field_inv_array(safe, spec), spec)
        out[rest, :f] = np.where(den == 0, inf, vals)
        out[rest, f] = a
    return out


def _swap_apply(e: Ensemble, keys: np.ndarray, flips: np.ndarray) -> np.ndarray:
    q = e.q
    x = np.broadcast_to(np.arange(q, dtype=np.int64), (keys.shape[0], q)).copy()
    bits = e._round_bits
    for r in range(e.rounds):
        partner = (keys[:, r:r + 1] - x) % q
        hi = np.maximum(x, partner)
        swap = (bits[r][hi] ^ flips[:, r:r + 1]).astype(bool)
        x = np.where(swap, partner, x)
    return x


def sample_many(e: Ensemble, rng, size: int) -> np.ndarray:
    """Draw ``size`` permutations; returns an int array of shape ``(size, q)``."""
    rng = as_generator(rng)
    if e.kind in ("additive", "affine", "fractional_linear"):
        idx = rng.integers(0, support_size(e), size=size, dtype=np.int64)
        return _decode(e, idx)
    if e.kind == "uniform":
        return rng.permuted(np.tile(np.arange(e.q, dtype=np.int64), (size, 1)), axis=1)
    if e.kind == "table":
        idx = rng.integers(0, len(e.table), size=size)
        return e._table_array[idx]
    keys = rng.integers(0, e.q, size=(size, e.rounds), dtype=np.int64)
    flips = rng.integers(0, 2, size=(size, e.rounds), dtype=np.int8)
    return _swap_apply(e, keys, flips)


def sample(e: Ensemble, rng) -> Permutation:
    return Permutation(sample_many(e, rng, 1)[0])


def support_arrays(e: Ensemble) -> tuple[np.ndarray, np.ndarray]:
    """Distinct support permutations (rows) and their probabilities."""
    size = support_size(e)
    if e.kind == "uniform" and e.q > UNIFORM_ENUM_MAX_Q:
        raise CapacityError(
            f"uniform ensemble on q={e.q} cannot be enumerated (q must be <= "
            f"{UNIFORM_ENUM_MAX_Q})", size=size, bound=SUPPORT_CAP)
    if size > SUPPORT_CAP:
        raise CapacityError(f"support size {size} exceeds the enumeration cap {SUPPORT_CAP}",
                            size=size, bound=SUPPORT_CAP)
    if e.kind in ("additive", "affine", "fractional_linear"):
        perms = _decode(e, np.arange(size, dtype=np.int64))
        return perms, np.full(size, 1.0 / size)
    if e.kind == "uniform":
        perms = np.array(list(permutations(range(e.q))), dtype=np.int64)
        return perms, np.full(size, 1.0 / size)
    if e.kind == "table":
        raw = e._table_array
    else:
        seeds = np.array(list(product(range(e.q), range(2), repeat=e.rounds)), dtype=np.int64)
        seeds = seeds.reshape(size, e.rounds, 2)
        raw = _swap_apply(e, seeds[:, :, 0], seeds[:, :, 1].astype(np.int8))
    uniq, first, counts = np.unique(raw, axis=0, return_index=True, return_counts=True)
    order = np.argsort(first, kind="stable")
    return uniq[order], counts[order] / raw.shape[0]


def enumerate_support(e: Ensemble) -> list[tuple[Permutation, float]]:
    perms, probs = support_arrays(e)
    return [(Permutation(row), float(p)) for row, p in zip(perms, probs)]


def _distinct_count(q: int, m: int) -> int:
    return math.perm(q, m)


def test_independence(e: Ensemble, m: int, mode: str = "exact", trials: int | None = None,
                      rng=None) -> IndependenceReport:
    """Worst-case TV distance of ``(pi(x_1), ..., pi(x_m))`` from uniform on distinct tuples.

    ``exact`` enumerates the support; ``sampled`` uses the plug-in estimator on
    ``trials`` shared draws.  The maximum is over every ordered source tuple of
    distinct symbols.
    """
    q = e.q
    if not 1 <= m <= q:
        raise DomainError(f"independence order m={m} outside [1, {q}]")
    domain = _distinct_count(q, m)
    if domain > EXACT_DOMAIN_CAP:
        raise CapacityError(f"|Sigma_m| = {domain} exceeds the cap {EXACT_DOMAIN_CAP}",
                            size=domain, bound=EXACT_DOMAIN_CAP)
    if mode == "exact":
        perms, weights = support_arrays(e)
    elif mode == "sampled":
        if trials is None or trials < 1:
            raise ParameterError("sampled mode needs trials >= 1")
        perms = sample_many(e, rng, trials)
        weights = np.full(trials, 1.0 / trials)
    else:
        raise ParameterError(f"unknown mode {mode!r}")

    cells = q ** m
    radix = q ** np.arange(m, dtype=np.int64)
    grid = np.indices((q,) * m).reshape(m, -1).T
    distinct = np.array([len(set(row)) == m for row in grid.tolist()])
    uniform = distinct / domain

    sources = np.array(list(permutations(range(q), m)), dtype=np.int64)
    chunk = max(1, min(len(sources), (1 << 22) // max(cells, perms.shape[0])))
    tv_max, worst = -1.0, None
    for start in range(0, len(sources), chunk):
        block = sources[start:start + chunk]
        codes = perms[:, block] @ radix  # (support, block)
        offset = np.arange(len(block), dtype=np.int64) * cells
        flat = (codes + offset[None, :]).ravel()
        w = np.broadcast_to(weights[:, None], codes.shape).ravel()
        dist = np.bincount(flat, weights=w, minlength=len(block) * cells).reshape(len(block), cells)
        tv = 0.5 * np.abs(dist - uniform[None, :]).sum(axis=1)
        j = int(np.argmax(tv))
        if tv[j] > tv_max:
            tv_max, worst = float(tv[j]), tuple(int(s) for s in block[j])
    return IndependenceReport(m=m, tv_max=min(max(tv_max, 0.0), 1.0), worst_tuple=worst,
                              mode=mode, trials=trials if mode == "sampled" else None,
                              domain_size=domain)


test_independence.__test__ = False  # keep pytest from collecting it


def random_bits_cost(e: Ensemble, k: int, n: int) -> int:
    """Random bits needed to sample a ``k x n`` matrix of independent draws."""
    if k < 1 or n < 1:
        raise DomainError("k and n must be >= 1")
    if e.kind == "swap_or_not":
        per_draw = e.rounds * (math.ceil(math.log2(e.q)) + 1)
    else:
        size = support_size(e)
        per_draw = (size - 1).bit_length()  # ceil(log2(size)), exact for big ints
    return n * k * per_draw


def parse_ensemble(desc: str, master_seed: int = 0) -> Ensemble:
    """Build an ensemble from a descriptor such as ``affine:5^1`` or ``swapnot:8:64``."""
    kind, _, rest = desc.strip().partition(":")
    if not rest:
        raise ValidationError(f"malformed ensemble descriptor {desc!r}")
    try:
        if kind == "additive":
            return additive_ensemble(FieldSpec.parse(rest))
        if kind == "affine":
            return affine_ensemble(FieldSpec.parse(rest))
        if kind in ("pgl", "fractional_linear"):
            return fractional_linear_ensemble(FieldSpec.parse(rest))
        if kind == "uniform":
            return uniform_ensemble(int(rest))
        if kind == "swapnot":
            parts = rest.split(":")
            if len(parts) not in (2, 3):
                raise ValidationError(f"swapnot descriptor needs q:rounds[:seed], got {desc!r}")
            seed = int(parts[2]) if len(parts) > 2 else master_seed
            return swap_or_not_ensemble(int(parts[0]), int(parts[1]), seed)
    except ValueError as exc:
        if isinstance(exc, APCodeError):
            raise
        raise ValidationError(f"malformed ensemble descriptor {desc!r}") from exc
    if kind == "table":
        from .formats import read_table_file

        return table_ensemble(read_table_file(rest))
    raise ValidationError(f"unknown ensemble kind in descriptor {desc!r}")

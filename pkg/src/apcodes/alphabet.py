"""Alphabet symbols, prime-power finite fields and permutations of the alphabet.

Symbols are plain integers in ``[0, q)``.  A :class:`FieldSpec` optionally
overlays a field structure on them: the symbol value of a field element is
its polynomial-basis coefficient vector read in base ``p``, constant term
first (``value = c_0 + c_1 p + ... + c_{t-1} p^{t-1}``).

Scalar arithmetic (:func:`field_add`, :func:`field_mul`, :func:`field_inv`)
works directly on polynomials.  The ``*_array`` variants are table backed and
vectorised with numpy; they are what the permutation ensembles use.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, ValidationError

MAX_ALPHABET = 1 << 16

# Coefficients listed highest degree first, as in the text form ``2^2/1,1,1``.
DEFAULT_MODULI = {
    4: (1, 1, 1),  # x^2 + x + 1
    8: (1, 0, 1, 1),  # x^3 + x + 1
    16: (1, 0, 0, 1, 1),  # x^4 + x + 1
    32: (1, 0, 0, 1, 0, 1),  # x^5 + x^2 + 1
}


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


def _digits(value: int, p: int, t: int) -> list[int]:
    """Base-``p`` digits of ``value``, least significant first."""
    out = []
    for _ in range(t):
        value, r = divmod(value, p)
        out.append(r)
    return out


def _undigits(digits: Sequence[int], p: int) -> int:
    value = 0
    for d in reversed(digits):
        value = value * p + d
    return value


def _poly_rem(num: list[int], den: list[int], p: int) -> list[int]:
    """Remainder of ``num`` by monic ``den`` over GF(p); both low-first."""
    num = list(num)
    dd = len(den) - 1
    for shift in range(len(num) - 1 - dd, -1, -1):
        c = num[shift + dd] % p
        if c:
            for i, d in enumerate(den):
                num[shift + i] = (num[shift + i] - c * d) % p
    return [c % p for c in num[:dd]] + [0] * max(0, dd - len(num))


def _poly_mul(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return out


def is_irreducible(p: int, modulus: Sequence[int]) -> bool:
    """Trial-division irreducibility test; ``modulus`` is monic, high-first."""
    low = list(reversed(modulus))
    t = len(low) - 1
    if t <= 1:
        return t == 1
    for d in range(1, t // 2 + 1):
        for lower in product(range(p), repeat=d):
            if all(rem == 0 for rem in _poly_rem(low, list(lower) + [1], p)):
                return False
    return True


def find_irreducible(p: int, t: int) -> tuple[int, ...]:
    """Smallest monic irreducible polynomial of degree ``t`` (high-first)."""
    if t == 1:
        return (1, 0)
    for value in range(p ** t):
        low = _digits(value, p, t)
        if low[0] == 0:
            continue
        modulus = tuple([1] + list(reversed(low)))
        if is_irreducible(p, modulus):
            return modulus
    raise DomainError(f"no irreducible polynomial of degree {t} over GF({p})")


@dataclass(frozen=True)
class FieldSpec:
    """A prime-power field GF(p^t) in polynomial basis.

    ``modulus`` holds the ``t + 1`` coefficients of a degree-``t``
    irreducible polynomial, highest degree first.  When omitted, a default
    is chosen: the shipped moduli for q in {4, 8, 16, 32}, otherwise the
    smallest irreducible polynomial.
    """

    p: int
    t: int = 1
    modulus: tuple[int, ...] | None = None

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ValidationError(f"field characteristic {self.p} is not prime")
        if self.t < 1:
            raise ValidationError(f"extension degree must be >= 1, got {self.t}")
        q = self.p ** self.t
        if q > MAX_ALPHABET:
            raise ValidationError(f"field size {q} exceeds the cap {MAX_ALPHABET}")
        if self.modulus is None:
            if self.t == 1:
                modulus = (1, 0)
            else:
                modulus = DEFAULT_MODULI.get(q) if self.p == 2 else None
                modulus = modulus or find_irreducible(self.p, self.t)
        else:
            modulus = tuple(int(c) for c in self.modulus)
            if len(modulus) != self.t + 1:
                raise ValidationError(
                    f"modulus must have {self.t + 1} coefficients, got {len(modulus)}"
                )
            if any(not 0 <= c < self.p for c in modulus):
                raise ValidationError(f"modulus coefficients must lie in [0, {self.p})")
            if modulus[0] == 0:
                raise ValidationError("modulus leading coefficient is zero")
            lead_inv = pow(modulus[0], self.p - 2, self.p)
            modulus = tuple(c * lead_inv % self.p for c in modulus)
            if not is_irreducible(self.p, modulus):
                raise ValidationError(f"modulus {modulus} is reducible over GF({self.p})")
        object.__setattr__(self, "modulus", modulus)

    @property
    def q(self) -> int:
        return self.p ** self.t

    def __str__(self):
        text = f"{self.p}^{self.t}"
        if self.t > 1:
            text += "/" + ",".join(str(c) for c in self.modulus)
        return text

    @classmethod
    def parse(cls, text: str) -> "FieldSpec":
        """Parse ``p^t/c_t,...,c_0`` (the modulus part is optional)."""
        text = text.strip()
        head, _, tail = text.partition("/")
        try:
            if "^" in head:
                p_text, t_text = head.split("^", 1)
                p, t = int(p_text), int(t_text)
            else:
                p, t = _prime_power(int(head))
            modulus = tuple(int(c) for c in tail.split(",")) if tail else None
        except ValueError as exc:
            raise ValidationError(f"malformed field spec {text!r}") from exc
        return cls(p, t, modulus)


def _prime_power(q: int) -> tuple[int, int]:
    # bare "q" in a field spec: split into p^t when q is a prime power
    for p in range(2, int(q ** 0.5) + 1):
        if q % p == 0:
            t = 0
            while q % p == 0:
                q //= p
                t += 1
            return (p, t) if q == 1 else (p * q, 1)
    return q, 1


def _check_symbol(a: int, spec: FieldSpec) -> int:
    a = int(a)
    if not 0 <= a < spec.q:
        raise DomainError(f"symbol {a} outside [0, {spec.q})")
    return a


def field_add(a: int, b: int, spec: FieldSpec) -> int:
    a, b = _check_symbol(a, spec), _check_symbol(b, spec)
    if spec.p == 2:
        return a ^ b
    if spec.t == 1:
        return (a + b) % spec.p
    da, db = _digits(a, spec.p, spec.t), _digits(b, spec.p, spec.t)
    return _undigits([(x + y) % spec.p for x, y in zip(da, db)], spec.p)


def field_neg(a: int, spec: FieldSpec) -> int:
    a = _check_symbol(a, spec)
    return _undigits([-d % spec.p for d in _digits(a, spec.p, spec.t)], spec.p)


def field_mul(a: int, b: int, spec: FieldSpec) -> int:
    a, b = _check_symbol(a, spec), _check_symbol(b, spec)
    if spec.t == 1:
        return a * b % spec.p
    prod = _poly_mul(_digits(a, spec.p, spec.t), _digits(b, spec.p, spec.t), spec.p)
    rem = _poly_rem(prod, list(reversed(spec.modulus)), spec.p)
    return _undigits(rem, spec.p)


def field_inv(a: int, spec: FieldSpec) -> int:
    a = _check_symbol(a, spec)
    if a == 0:
        raise DomainError("zero has no multiplicative inverse")
    # a^(q-2) by square-and-multiply
    result, base, e = 1, a, spec.q - 2
    while e:
        if e & 1:
            result = field_mul(result, base, spec)
        base = field_mul(base, base, spec)
        e >>= 1
    return result


@lru_cache(maxsize=64)
def _log_tables(spec: FieldSpec) -> tuple[np.ndarray, np.ndarray]:
    q = spec.q
    if q == 2:
        return np.array([1], dtype=np.int64), np.array([0, 0], dtype=np.int64)
    for g in range(2, q):
        powers = [1]
        x = g
        while x != 1 and len(powers) < q:
            powers.append(x)
            x = field_mul(x, g, spec)
        if len(powers) == q - 1:
            exp = np.array(powers, dtype=np.int64)
            log = np.zeros(q, dtype=np.int64)
            log[exp] = np.arange(q - 1)
            exp.setflags(write=False)
            log.setflags(write=False)
            return exp, log
    raise DomainError(f"no primitive element found for {spec}")  # pragma: no cover


def primitive_element(spec: FieldSpec) -> int:
    exp, _ = _log_tables(spec)
    return int(exp[1]) if spec.q > 2 else 1


def field_add_array(a, b, spec: FieldSpec) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if spec.p == 2:
        return a ^ b
    if spec.t == 1:
        return (a + b) % spec.p
    out = np.zeros(np.broadcast(a, b).shape, dtype=np.int64)
    place = 1
    for _ in range(spec.t):
        out += ((a // place + b // place) % spec.p) * place
        place *= spec.p
    return out


def field_mul_array(a, b, spec: FieldSpec) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    exp, log = _log_tables(spec)
    prod = exp[(log[a] + log[b]) % (spec.q - 1)]
    return np.where((a == 0) | (b == 0), 0, prod)


def field_inv_array(a, spec: FieldSpec) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64)
    if np.any(a == 0):
        raise DomainError("zero has no multiplicative inverse")
    exp, log = _log_tables(spec)
    return exp[(-log[a]) % (spec.q - 1)]


class Permutation:
    """A bijection on ``{0, ..., q-1}`` stored as its image array."""

    __slots__ = ("_images",)

    def __init__(self, images: Iterable[int]):
        arr = np.array(list(images) if not isinstance(images, np.ndarray) else images,
                       dtype=np.int64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValidationError("permutation images must be a non-empty 1-d sequence")
        _check_bijection(arr)
        arr.setflags(write=False)
        self._images = arr

    @classmethod
    def identity(cls, q: int) -> "Permutation":
        return cls(np.arange(q))

    @property
    def q(self) -> int:
        return int(self._images.size)

    @property
    def images(self) -> np.ndarray:
        return self._images

    def __call__(self, s: int) -> int:
        return int(self._images[s])

    def __len__(self):
        return self.q

    def __eq__(self, other):
        if not isinstance(other, Permutation):
            return NotImplemented
        return np.array_equal(self._images, other._images)

    def __hash__(self):
        return hash(self._images.tobytes())

    def __repr__(self):
        return f"Permutation({self._images.tolist()})"

    def tolist(self) -> list[int]:
        return self._images.tolist()

    def compose(self, other: "Permutation") -> "Permutation":
        """``self ∘ other``: apply ``other`` first."""
        return perm_compose(self, other)

    def inverse(self) -> "Permutation":
        return perm_inverse(self)

    def is_identity(self) -> bool:
        return bool(np.array_equal(self._images, np.arange(self.q)))


def _check_bijection(arr: np.ndarray) -> None:
    q = arr.size
    if arr.min() < 0 or arr.max() >= q:
        bad = next(int(v) for v in arr if not 0 <= v < q)
        raise ValidationError(f"image {bad} outside [0, {q})")
    if np.bincount(arr, minlength=q).max() > 1:
        seen = set()
        for v in arr.tolist():
            if v in seen:
                err = ValidationError(f"images are not a bijection: {v} appears twice")
                err.duplicate = v
                raise err
            seen.add(v)


def perm_validate(images: Iterable[int]) -> Permutation:
    return Permutation(images)


def perm_apply(pi: Permutation, s: int) -> int:
    if not 0 <= s < pi.q:
        raise DomainError(f"symbol {s} outside [0, {pi.q})")
    return pi(s)


def perm_compose(pi: Permutation, sigma: Permutation) -> Permutation:
    """Return ``pi ∘ sigma``, i.e. ``s -> pi(sigma(s))``."""
    if pi.q != sigma.q:
        raise ValidationError(f"cannot compose permutations of sizes {pi.q} and {sigma.q}")
    return Permutation(pi.images[sigma.images])


def perm_inverse(pi: Permutation) -> Permutation:
    inv = np.empty_like(pi.images)
    inv[pi.images] = np.arange(pi.q)
    return Permutation(inv)

"""Exact arithmetic and ordering for value groups of finite rational rank.

A :class:`ValueGroup` fixes a rank ``r`` and an ordering mode.  In the
``sqrt-primes`` mode the group generators are interpreted as the real
numbers ``1, sqrt(2), sqrt(3), sqrt(5), ...`` (generator 1 is rational so
that plain rational values are representable; the remaining generators run
through square roots of the primes).  These reals are linearly independent
over Q, so a :class:`Value` is determined by its rational coordinate
vector and the group is archimedean of rational rank ``r``.

Sign decisions for ``sqrt-primes`` are made by exact interval refinement:
square roots are bracketed with integer ``isqrt`` at ``k`` fractional bits
and ``k`` doubles until the interval excludes zero.  The zero case is
decided first from the coordinates alone (Q-linear independence), so the
refinement always terminates.

The ``lex`` mode orders coordinate vectors lexicographically and exists
for composite (rank >= 2) value groups; it is not exercised by the
blow-up algorithms.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import isqrt, lcm
from typing import Iterable, Sequence

from . import _linalg
from .errors import (
    DegenerateBasisError,
    GroupMismatchError,
    InvalidInputError,
    NotInDivisibleHullError,
)

SQRT_PRIMES = "sqrt-primes"
LEX = "lex"

_INITIAL_BITS = 64


class Ordering(Enum):
    Less = -1
    Equal = 0
    Greater = 1


def _first_primes(k: int) -> list[int]:
    primes: list[int] = []
    n = 2
    while len(primes) < k:
        if all(n % p for p in primes):
            primes.append(n)
        n += 1
    return primes


def _generator_radicands(rank: int) -> list[int]:
    # generator 1 is the rational unit 1; the rest are sqrt of primes
    return [1] + _first_primes(rank - 1)


def fraction_to_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def fraction_from_str(s: str) -> Fraction:
    return Fraction(s)


@dataclass(frozen=True)
class ValueGroup:
    """Ordered group of finite rational rank with a fixed generator basis."""

    rank: int
    ordering: str = SQRT_PRIMES
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        if self.rank < 1:
            raise InvalidInputError("rank must be >= 1")
        if self.ordering not in (SQRT_PRIMES, LEX):
            raise InvalidInputError(f"unknown ordering {self.ordering!r}")
        labels = self.labels or tuple(f"g{i+1}" for i in range(self.rank))
        if len(labels) != self.rank or len(set(labels)) != self.rank:
            raise InvalidInputError("labels must be pairwise distinct, one per generator")
        object.__setattr__(self, "labels", tuple(labels))

    def value(self, coords: Iterable[Fraction | int | str]) -> "Value":
        return Value(tuple(Fraction(c) for c in coords), self)

    def rational(self, q: Fraction | int | str) -> "Value":
        """The rational value q * (first generator); in sqrt-primes mode the
        first generator is 1, so this is the embedding of Q."""
        coords = [Fraction(q)] + [Fraction(0)] * (self.rank - 1)
        return self.value(coords)

    def zero(self) -> "Value":
        return self.value([0] * self.rank)

    def to_json(self) -> dict:
        return {"rank": self.rank, "ordering": self.ordering, "labels": list(self.labels)}

    @staticmethod
    def from_json(obj: dict) -> "ValueGroup":
        return ValueGroup(
            rank=int(obj["rank"]),
            ordering=obj.get("ordering", SQRT_PRIMES),
            labels=tuple(obj.get("labels", ())),
        )


@dataclass(frozen=True)
class Value:
    """Element of a :class:`ValueGroup`, held as exact rational coordinates."""

    coords: tuple[Fraction, ...]
    group: ValueGroup

    def __post_init__(self):
        if len(self.coords) != self.group.rank:
            raise InvalidInputError("coordinate count must equal the group rank")

    def _check(self, other: "Value") -> None:
        if self.group != other.group:
            raise GroupMismatchError("group mismatch")

    def __add__(self, other: "Value") -> "Value":
        self._check(other)
        return Value(tuple(a + b for a, b in zip(self.coords, other.coords)), self.group)

    def __sub__(self, other: "Value") -> "Value":
        self._check(other)
        return Value(tuple(a - b for a, b in zip(self.coords, other.coords)), self.group)

    def __neg__(self) -> "Value":
        return Value(tuple(-a for a in self.coords), self.group)

    def scale(self, q: Fraction | int) -> "Value":
        q = Fraction(q)
        return Value(tuple(q * a for a in self.coords), self.group)

    __rmul__ = __mul__ = scale

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def sign(self) -> int:
        return compare(self, self.group.zero()).value

    def is_positive(self) -> bool:
        return self.sign() > 0

    def __lt__(self, other):
        return compare(self, other) is Ordering.Less

    def __le__(self, other):
        return compare(self, other) is not Ordering.Greater

    def __gt__(self, other):
        return compare(self, other) is Ordering.Greater

    def __ge__(self, other):
        return compare(self, other) is not Ordering.Less

    def to_json(self) -> dict:
        return {"coords": [fraction_to_str(c) for c in self.coords]}

    @staticmethod
    def from_json(obj: dict, group: ValueGroup) -> "Value":
        return group.value([fraction_from_str(c) for c in obj["coords"]])

    def __repr__(self):
        return f"Value({', '.join(fraction_to_str(c) for c in self.coords)})"


def _sqrt_interval(radicand: int, bits: int) -> tuple[Fraction, Fraction]:
    """[lo, hi] bracketing sqrt(radicand) with hi - lo = 2**-bits."""
    scaled = radicand << (2 * bits)
    lo = isqrt(scaled)
    den = 1 << bits
    if lo * lo == scaled:
        f = Fraction(lo, den)
        return f, f
    return Fraction(lo, den), Fraction(lo + 1, den)


def _sqrt_prime_sign(diff: Sequence[Fraction]) -> int:
    """Sign of sum(diff[i] * sqrt(radicand_i)); diff must not be all zero."""
    radicands = _generator_radicands(len(diff))
    bits = _INITIAL_BITS
    while True:
        lo = hi = Fraction(0)
        for c, rad in zip(diff, radicands):
            if c == 0:
                continue
            slo, shi = _sqrt_interval(rad, bits)
            if c > 0:
                lo += c * slo
                hi += c * shi
            else:
                lo += c * shi
                hi += c * slo
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        # zero is inside the bracket: refine (terminates, the sum
        # is a nonzero algebraic number)
        bits *= 2


def compare(a: Value, b: Value) -> Ordering:
    """Total order on the group; exact."""
    if a.group != b.group:
        raise GroupMismatchError("group mismatch")
    diff = tuple(x - y for x, y in zip(a.coords, b.coords))
    if all(d == 0 for d in diff):
        return Ordering.Equal
    if a.group.ordering == LEX:
        for d in diff:
            if d != 0:
                return Ordering.Greater if d > 0 else Ordering.Less
        return Ordering.Equal
    return Ordering(_sqrt_prime_sign(diff))


def value_of_exponent(alpha: Sequence[int], weights: Sequence[Value]) -> Value:
    """sum(alpha[i] * weights[i]); the value of the monomial u^alpha."""
    if len(alpha) != len(weights):
        raise InvalidInputError("exponent length must match the number of weights")
    if not weights:
        raise InvalidInputError("at least one weight is required")
    group = weights[0].group
    for w in weights[1:]:
        if w.group != group:
            raise GroupMismatchError("group mismatch")
    coords = [Fraction(0)] * group.rank
    for a, w in zip(alpha, weights):
        if a:
            for i, c in enumerate(w.coords):
                coords[i] += a * c
    return group.value(coords)


def min_integer_multiple_in_lattice(
    target: Value, basis: Sequence[Value]
) -> tuple[int, tuple[int, ...]]:
    """Smallest m >= 1 with m*target in the Z-lattice spanned by ``basis``,
    together with the integer coefficients of m*target in that basis.

    The basis must be Q-linearly independent and the target must lie in its
    Q-span; solved exactly via the rational coordinate system.
    """
    if not basis:
        raise DegenerateBasisError("degenerate basis")
    group = target.group
    for b in basis:
        if b.group != group:
            raise GroupMismatchError("group mismatch")
    # columns = basis coordinates, rows = group coordinates
    a = tuple(
        tuple(basis[j].coords[i] for j in range(len(basis)))
        for i in range(group.rank)
    )
    if _linalg.rank_rational(a) < len(basis):
        raise DegenerateBasisError("degenerate basis")
    x = _linalg.solve_rational(a, target.coords)
    if x is None:
        raise NotInDivisibleHullError("not in divisible hull")
    m = lcm(*(q.denominator for q in x)) if x else 1
    coeffs = tuple(int(q * m) for q in x)
    return m, coeffs

"""Exact sparse multivariate polynomials over Q and simple extension towers.

Coefficients live in a :class:`FieldTower`: the base field Q extended by a
chain of symbols, each with a monic defining polynomial over the level
below.  Elements are kept in canonical form (reduced modulo the definers,
represented as nested coefficient tuples of fixed length), so structural
equality is field equality.

Irreducibility of definers is trusted at input and falsified lazily: a
failed inversion raises :class:`~valmono.errors.ReducibleDefinerError`
carrying the discovered factor.

Polynomials are immutable by convention; all operations return fresh
objects.  Term storage order is graded-lex on exponent vectors, which is
purely internal (it fixes JSON output order, nothing else).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

from . import _linalg
from .errors import (
    InvalidInputError,
    LaurentEscapeError,
    NonMonicDivisorError,
    ReducibleDefinerError,
)
from .values import fraction_from_str, fraction_to_str

# A tower element is a Fraction at level 0 and a tuple of lower-level
# elements (fixed length = degree of the definer) above that.
Elem = Union[Fraction, tuple]


def _poly_trim(cs: list) -> list:
    while cs and _is_zero_like(cs[-1]):
        cs.pop()
    return cs


def _is_zero_like(e) -> bool:
    if isinstance(e, Fraction):
        return e == 0
    return all(_is_zero_like(c) for c in e)


@dataclass(frozen=True)
class FieldTower:
    """Q extended by ``extensions``: ordered (symbol, monic definer) pairs.

    Each definer is a coefficient tuple over the level below, lowest degree
    first, with leading coefficient equal to that level's one.
    """

    extensions: tuple[tuple[str, tuple], ...] = ()

    def __post_init__(self):
        syms = [s for s, _ in self.extensions]
        if len(set(syms)) != len(syms):
            raise InvalidInputError("tower symbols must be distinct")
        for level, (sym, mp) in enumerate(self.extensions):
            if len(mp) < 2:
                raise InvalidInputError(f"definer of {sym} must have degree >= 1")

    # -- structure ---------------------------------------------------

    @property
    def depth(self) -> int:
        return len(self.extensions)

    def degree_at(self, level: int) -> int:
        return len(self.extensions[level - 1][1]) - 1

    def extend(self, symbol: str, minpoly_coeffs: Sequence[Elem]) -> "FieldTower":
        """New tower with one more level.  ``minpoly_coeffs`` are elements of
        *this* tower, lowest degree first, monic."""
        mp = tuple(minpoly_coeffs)
        if not self.eq(mp[-1], self.one()):
            raise InvalidInputError("definer must be monic")
        return FieldTower(self.extensions + ((symbol, mp),))

    # -- element constructors ----------------------------------------

    def _zero_at(self, level: int) -> Elem:
        if level == 0:
            return Fraction(0)
        return tuple(self._zero_at(level - 1) for _ in range(self.degree_at(level)))

    def zero(self) -> Elem:
        return self._zero_at(self.depth)

    def _raise_to(self, e: Elem, level: int) -> Elem:
        """Embed a level-(level-1) element at ``level``."""
        coeffs = [e] + [self._zero_at(level - 1) for _ in range(self.degree_at(level) - 1)]
        return tuple(coeffs)

    def from_rational(self, q: Fraction | int | str) -> Elem:
        e: Elem = Fraction(q)
        for level in range(1, self.depth + 1):
            e = self._raise_to(e, level)
        return e

    def one(self) -> Elem:
        return self.from_rational(1)

    def generator(self, symbol: str) -> Elem:
        """The element theta_k for one of the tower symbols."""
        for idx, (sym, mp) in enumerate(self.extensions):
            if sym == symbol:
                level = idx + 1
                if self.degree_at(level) >= 2:
                    gen: Elem = tuple(
                        self._one_at(level - 1) if i == 1 else self._zero_at(level - 1)
                        for i in range(self.degree_at(level))
                    )
                else:
                    # degree-1 definer X + c0: theta = -c0
                    gen = self._raise_to(self._neg(mp[0], level - 1), level)
                e: Elem = gen
                for lv in range(level + 1, self.depth + 1):
                    e = self._raise_to(e, lv)
                return e
        raise InvalidInputError(f"unknown tower symbol {symbol!r}")

    # -- arithmetic ---------------------------------------------------

    def is_zero(self, e: Elem) -> bool:
        return _is_zero_like(e)

    def eq(self, a: Elem, b: Elem) -> bool:
        return a == b

    def _add(self, a: Elem, b: Elem, level: int) -> Elem:
        if level == 0:
            return a + b
        return tuple(self._add(x, y, level - 1) for x, y in zip(a, b))

    def add(self, a: Elem, b: Elem) -> Elem:
        return self._add(a, b, self.depth)

    def _neg(self, a: Elem, level: int) -> Elem:
        if level == 0:
            return -a
        return tuple(self._neg(x, level - 1) for x in a)

    def neg(self, a: Elem) -> Elem:
        return self._neg(a, self.depth)

    def sub(self, a: Elem, b: Elem) -> Elem:
        return self.add(a, self.neg(b))

    def _mul(self, a: Elem, b: Elem, level: int) -> Elem:
        if level == 0:
            return a * b
        deg = self.degree_at(level)
        prod = [self._zero_at(level - 1) for _ in range(2 * deg - 1)]
        for i, x in enumerate(a):
            if _is_zero_like(x):
                continue
            for j, y in enumerate(b):
                if _is_zero_like(y):
                    continue
                prod[i + j] = self._add(prod[i + j], self._mul(x, y, level - 1), level - 1)
        mp = self.extensions[level - 1][1]
        # reduce modulo the monic definer
        for i in range(len(prod) - 1, deg - 1, -1):
            c = prod[i]
            if _is_zero_like(c):
                continue
            for k in range(deg):
                prod[i - deg + k] = self._sub_level(
                    prod[i - deg + k], self._mul(c, mp[k], level - 1), level - 1
                )
            prod[i] = self._zero_at(level - 1)
        return tuple(prod[:deg])

    def _sub_level(self, a: Elem, b: Elem, level: int) -> Elem:
        return self._add(a, self._neg(b, level), level)

    def mul(self, a: Elem, b: Elem) -> Elem:
        return self._mul(a, b, self.depth)

    def _inv(self, a: Elem, level: int) -> Elem:
        if level == 0:
            if a == 0:
                raise ZeroDivisionError("inverse of zero")
            return 1 / a
        if _is_zero_like(a):
            raise ZeroDivisionError("inverse of zero")
        # extended Euclid in (level-1)[X] against the definer
        mp = list(self.extensions[level - 1][1])
        r0, r1 = mp, _poly_trim(list(a))
        s0, s1 = [], [self._one_at(level - 1)]
        while r1:
            q, r = self._poly_divmod(r0, r1, level - 1)
            r0, r1 = r1, r
            s0, s1 = s1, self._poly_sub(s0, self._poly_mul(q, s1, level - 1), level - 1)
        # r0 = gcd; invertible iff gcd is a nonzero constant
        if len(r0) != 1:
            raise ReducibleDefinerError(
                f"reducible definer of {self.extensions[level - 1][0]}", factor=tuple(r0)
            )
        c_inv = self._inv(r0[0], level - 1)
        inv = [self._mul(c, c_inv, level - 1) for c in s0]
        inv = inv[: self.degree_at(level)]
        inv += [self._zero_at(level - 1)] * (self.degree_at(level) - len(inv))
        return tuple(inv)

    def _one_at(self, level: int) -> Elem:
        if level == 0:
            return Fraction(1)
        return self._raise_to(self._one_at(level - 1), level)

    def inv(self, a: Elem) -> Elem:
        return self._inv(a, self.depth)

    def div(self, a: Elem, b: Elem) -> Elem:
        return self.mul(a, self.inv(b))

    def scale(self, a: Elem, q: Fraction | int) -> Elem:
        return self.mul(a, self.from_rational(Fraction(q)))

    # dense univariate helpers over a given level (used by _inv)

    def _poly_sub(self, a: list, b: list, level: int) -> list:
        n = max(len(a), len(b))
        z = self._zero_at(level)
        out = []
        for i in range(n):
            x = a[i] if i < len(a) else z
            y = b[i] if i < len(b) else z
            out.append(self._sub_level(x, y, level))
        return _poly_trim(out)

    def _poly_mul(self, a: list, b: list, level: int) -> list:
        if not a or not b:
            return []
        out = [self._zero_at(level)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            for j, y in enumerate(b):
                out[i + j] = self._add(out[i + j], self._mul(x, y, level), level)
        return _poly_trim(out)

    def _poly_divmod(self, a: list, b: list, level: int) -> tuple[list, list]:
        if not b:
            raise ZeroDivisionError("polynomial division by zero")
        r = list(a)
        q = [self._zero_at(level)] * max(0, len(a) - len(b) + 1)
        lead_inv = self._inv(b[-1], level)
        while len(r) >= len(b):
            c = self._mul(r[-1], lead_inv, level)
            k = len(r) - len(b)
            q[k] = self._add(q[k], c, level)
            for i, y in enumerate(b):
                r[k + i] = self._sub_level(r[k + i], self._mul(c, y, level), level)
            r = _poly_trim(r)
            if not r:
                break
        return _poly_trim(q), r

    # -- residues -----------------------------------------------------

    def rational_part(self, e: Elem) -> Optional[Fraction]:
        """The rational value of ``e`` when it lies in Q, else None."""
        if isinstance(e, Fraction):
            return e
        if not all(_is_zero_like(c) for c in e[1:]):
            return None
        return self.rational_part(e[0])

    # -- JSON ----------------------------------------------------------

    def elem_to_json(self, e: Elem):
        if isinstance(e, Fraction):
            return fraction_to_str(e)
        return [self.elem_to_json(c) for c in e]

    def elem_from_json(self, obj) -> Elem:
        def build(o, level):
            if level == 0:
                if not isinstance(o, str):
                    raise InvalidInputError("base coefficients must be 'p/q' strings")
                return fraction_from_str(o)
            if isinstance(o, str):
                # a base rational given at a higher level: embed it
                e = fraction_from_str(o)
                for lv in range(1, level + 1):
                    e = self._raise_to(e, lv)
                return e
            deg = self.degree_at(level)
            coeffs = [build(c, level - 1) for c in o]
            if len(coeffs) > deg:
                raise InvalidInputError("coefficient tuple longer than the definer degree")
            coeffs += [self._zero_at(level - 1)] * (deg - len(coeffs))
            return tuple(coeffs)

        return build(obj, self.depth)

    def to_json(self) -> dict:
        exts = []
        prev = FieldTower(())
        for sym, mp in self.extensions:
            terms = []
            for i, c in enumerate(mp):
                if not _is_zero_like(c):
                    terms.append({"e": [i], "c": prev.elem_to_json(c)})
            exts.append({"sym": sym, "minpoly": {"vars": [sym], "terms": terms}})
            prev = FieldTower(prev.extensions + ((sym, mp),))
        return {"extensions": exts}

    @staticmethod
    def from_json(obj: dict) -> "FieldTower":
        tower = FieldTower(())
        for ext in obj.get("extensions", ()):
            sym = ext["sym"]
            mp_json = ext["minpoly"]
            deg = max(t["e"][0] for t in mp_json["terms"])
            coeffs = [tower.zero() for _ in range(deg + 1)]
            for t in mp_json["terms"]:
                coeffs[t["e"][0]] = tower.elem_from_json(t["c"])
            tower = tower.extend(sym, coeffs)
        return tower


QQ = FieldTower(())


def grlex_key(e: tuple[int, ...]) -> tuple:
    return (sum(e), e)


@dataclass(frozen=True)
class MultiPoly:
    """Sparse exact multivariate polynomial; no zero coefficients stored."""

    vars: tuple[str, ...]
    terms: Mapping[tuple[int, ...], Elem]
    tower: FieldTower = QQ

    # -- constructors --------------------------------------------------

    @staticmethod
    def build(
        vars: Sequence[str],
        terms: Mapping[tuple[int, ...], Elem] | Iterable[tuple[tuple[int, ...], Elem]],
        tower: FieldTower = QQ,
    ) -> "MultiPoly":
        vars = tuple(vars)
        collected: dict[tuple[int, ...], Elem] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for e, c in items:
            e = tuple(int(x) for x in e)
            if len(e) != len(vars):
                raise InvalidInputError("exponent length must match the variable count")
            if any(x < 0 for x in e):
                raise InvalidInputError("exponents must be nonnegative")
            if e in collected:
                collected[e] = tower.add(collected[e], c)
            else:
                collected[e] = c
        collected = {e: c for e, c in collected.items() if not tower.is_zero(c)}
        return MultiPoly(vars, collected, tower)

    @staticmethod
    def zero(vars: Sequence[str], tower: FieldTower = QQ) -> "MultiPoly":
        return MultiPoly(tuple(vars), {}, tower)

    @staticmethod
    def constant(vars: Sequence[str], c, tower: FieldTower = QQ) -> "MultiPoly":
        if isinstance(c, (int, str, Fraction)):
            c = tower.from_rational(c)
        e = tuple(0 for _ in vars)
        return MultiPoly.build(vars, {e: c}, tower)

    @staticmethod
    def variable(vars: Sequence[str], name: str, tower: FieldTower = QQ) -> "MultiPoly":
        vars = tuple(vars)
        e = tuple(1 if v == name else 0 for v in vars)
        if sum(e) != 1:
            raise InvalidInputError(f"unknown variable {name!r}")
        return MultiPoly.build(vars, {e: tower.one()}, tower)

    @staticmethod
    def monomial(vars: Sequence[str], exponent: Sequence[int], c=1, tower: FieldTower = QQ) -> "MultiPoly":
        if isinstance(c, (int, str, Fraction)):
            c = tower.from_rational(c)
        return MultiPoly.build(vars, {tuple(exponent): c}, tower)

    # -- basic queries ---------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def var_index(self, name: str) -> int:
        try:
            return self.vars.index(name)
        except ValueError:
            raise InvalidInputError(f"unknown variable {name!r}") from None

    def degree_in(self, name: str) -> int:
        """Degree in one variable; -1 for the zero polynomial."""
        i = self.var_index(name)
        return max((e[i] for e in self.terms), default=-1)

    def coefficient_in(self, name: str, degree: int) -> "MultiPoly":
        """Coefficient of name**degree, as a polynomial with that exponent zeroed."""
        i = self.var_index(name)
        out = {}
        for e, c in self.terms.items():
            if e[i] == degree:
                out[e[:i] + (0,) + e[i + 1:]] = c
        return MultiPoly(self.vars, out, self.tower)

    def constant_term(self) -> Elem:
        return self.terms.get(tuple(0 for _ in self.vars), self.tower.zero())

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def sorted_terms(self) -> list[tuple[tuple[int, ...], Elem]]:
        return sorted(self.terms.items(), key=lambda t: grlex_key(t[0]))

    # -- arithmetic -------------------------------------------------------

    def _check(self, other: "MultiPoly") -> None:
        if self.vars != other.vars or self.tower != other.tower:
            raise InvalidInputError("polynomials live in different rings")

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        self._check(other)
        out = dict(self.terms)
        tw = self.tower
        for e, c in other.terms.items():
            if e in out:
                s = tw.add(out[e], c)
                if tw.is_zero(s):
                    del out[e]
                else:
                    out[e] = s
            else:
                out[e] = c
        return MultiPoly(self.vars, out, tw)

    def __neg__(self) -> "MultiPoly":
        tw = self.tower
        return MultiPoly(self.vars, {e: tw.neg(c) for e, c in self.terms.items()}, tw)

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return self + (-other)

    def __mul__(self, other: "MultiPoly") -> "MultiPoly":
        self._check(other)
        tw = self.tower
        out: dict[tuple[int, ...], Elem] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                p = tw.mul(c1, c2)
                if e in out:
                    s = tw.add(out[e], p)
                    if tw.is_zero(s):
                        del out[e]
                    else:
                        out[e] = s
                elif not tw.is_zero(p):
                    out[e] = p
        return MultiPoly(self.vars, out, tw)

    def __pow__(self, n: int) -> "MultiPoly":
        if n < 0:
            raise InvalidInputError("negative power of a polynomial")
        result = MultiPoly.constant(self.vars, 1, self.tower)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def scale(self, c) -> "MultiPoly":
        tw = self.tower
        if isinstance(c, (int, str, Fraction)):
            c = tw.from_rational(c)
        out = {}
        for e, x in self.terms.items():
            p = tw.mul(x, c)
            if not tw.is_zero(p):
                out[e] = p
        return MultiPoly(self.vars, out, tw)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MultiPoly)
            and self.vars == other.vars
            and self.tower == other.tower
            and dict(self.terms) == dict(other.terms)
        )

    def __hash__(self):
        return hash((self.vars, self.tower, tuple(self.sorted_terms())))

    # -- ring changes ------------------------------------------------------

    def with_vars(self, new_vars: Sequence[str]) -> "MultiPoly":
        """Reinterpret over a superset / reordering of the variables."""
        new_vars = tuple(new_vars)
        pos = {}
        for i, v in enumerate(self.vars):
            if v not in new_vars:
                if self.degree_in(v) > 0:
                    raise InvalidInputError(f"variable {v!r} disappears but occurs")
                pos[i] = None
            else:
                pos[i] = new_vars.index(v)
        out = {}
        for e, c in self.terms.items():
            ne = [0] * len(new_vars)
            for i, x in enumerate(e):
                if x:
                    ne[pos[i]] = x
            key = tuple(ne)
            out[key] = self.tower.add(out[key], c) if key in out else c
        return MultiPoly(new_vars, {e: c for e, c in out.items() if not self.tower.is_zero(c)}, self.tower)

    def with_tower(self, tower: FieldTower) -> "MultiPoly":
        """Embed into a taller tower that extends the current one."""
        if tower.extensions[: self.tower.depth] != self.tower.extensions:
            raise InvalidInputError("target tower does not extend the current one")
        extra = tower.depth - self.tower.depth
        out = {}
        for e, c in self.terms.items():
            x = c
            for lv in range(self.tower.depth + 1, tower.depth + 1):
                x = tower._raise_to(x, lv)
            out[e] = x
        return MultiPoly(self.vars, out, tower)

    # -- JSON ----------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "vars": list(self.vars),
            "terms": [
                {"e": list(e), "c": self.tower.elem_to_json(c)}
                for e, c in self.sorted_terms()
            ],
        }

    @staticmethod
    def from_json(obj: dict, tower: FieldTower = QQ) -> "MultiPoly":
        vars = tuple(obj["vars"])
        terms = []
        for t in obj["terms"]:
            terms.append((tuple(t["e"]), tower.elem_from_json(t["c"])))
        return MultiPoly.build(vars, terms, tower)

    def __repr__(self):
        if self.is_zero():
            return "0"
        bits = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                f"{v}^{k}" if k > 1 else v for v, k in zip(self.vars, e) if k
            )
            cs = self.tower.elem_to_json(c)
            bits.append(f"({cs})*{mono}" if mono else f"({cs})")
        return " + ".join(bits)


@dataclass(frozen=True)
class LaurentMonomialMap:
    """Monomial substitution given by an integer matrix: column q is the
    exponent vector of the image of variable q."""

    matrix: tuple[tuple[int, ...], ...]
    unit_tags: Optional[tuple[bool, ...]] = None

    def __post_init__(self):
        n = len(self.matrix)
        if any(len(row) != n for row in self.matrix):
            raise InvalidInputError("matrix must be square")

    @property
    def n(self) -> int:
        return len(self.matrix)

    def apply_to_exponent(self, alpha: Sequence[int]) -> tuple[int, ...]:
        return _linalg.mat_vec(self.matrix, tuple(alpha))

    def det(self) -> int:
        d = _linalg.det(self.matrix)
        if d.denominator != 1:
            raise AssertionError("integer matrix with non-integer determinant")
        return int(d)

    def inverse(self) -> Optional["LaurentMonomialMap"]:
        inv = _linalg.inverse_int(self.matrix)
        return None if inv is None else LaurentMonomialMap(inv)

    def compose_after(self, first: "LaurentMonomialMap") -> "LaurentMonomialMap":
        """Map sending alpha to self(first(alpha))."""
        return LaurentMonomialMap(_linalg.mat_mul(self.matrix, first.matrix))

    def is_identity(self) -> bool:
        return self.matrix == _linalg.identity(self.n)

    def to_json(self) -> list:
        return [list(row) for row in self.matrix]

    @staticmethod
    def from_json(rows: list) -> "LaurentMonomialMap":
        return LaurentMonomialMap(tuple(tuple(int(x) for x in row) for row in rows))


def euclid_divide(f: MultiPoly, g: MultiPoly, x: str) -> tuple[MultiPoly, MultiPoly]:
    """Exact division f = q*g + r with deg_x(r) < deg_x(g); g monic in x."""
    f._check(g)
    d = g.degree_in(x)
    if d < 0:
        raise NonMonicDivisorError("non-monic divisor: zero divisor")
    lead = g.coefficient_in(x, d)
    if not (len(lead.terms) == 1 and lead.tower.eq(lead.constant_term(), lead.tower.one())):
        raise NonMonicDivisorError("non-monic divisor")
    xi = f.var_index(x)
    q = MultiPoly.zero(f.vars, f.tower)
    r = f
    while not r.is_zero() and r.degree_in(x) >= d:
        e = r.degree_in(x)
        c = r.coefficient_in(x, e)
        shift = tuple(e - d if i == xi else 0 for i in range(len(f.vars)))
        t = c * MultiPoly.monomial(f.vars, shift, 1, f.tower)
        q = q + t
        r = r - t * g
    return q, r


def q_adic_expansion(f: MultiPoly, Q: MultiPoly, x: str) -> list[MultiPoly]:
    """Digits (a_0, ..., a_s) with f = sum a_i Q^i and deg_x(a_i) < deg_x(Q)."""
    if Q.degree_in(x) < 1:
        raise NonMonicDivisorError("non-monic divisor: expansion base must involve the variable")
    digits = []
    cur = f
    while True:
        cur, r = euclid_divide(cur, Q, x)
        digits.append(r)
        if cur.is_zero():
            break
    return digits


def apply_monomial_map(f: MultiPoly, m: LaurentMonomialMap) -> MultiPoly:
    """Substitute every variable by its image monomial; exponents must stay
    nonnegative (use the forward matrix of a blow-up)."""
    if m.n != len(f.vars):
        raise InvalidInputError("matrix size must match the variable count")
    tw = f.tower
    out: dict[tuple[int, ...], Elem] = {}
    for e, c in f.terms.items():
        ne = m.apply_to_exponent(e)
        if any(x < 0 for x in ne):
            raise LaurentEscapeError(f"Laurent escape at exponent {e}")
        if ne in out:
            s = tw.add(out[ne], c)
            if tw.is_zero(s):
                del out[ne]
            else:
                out[ne] = s
        else:
            out[ne] = c
    return MultiPoly(f.vars, out, tw)


def substitute_variable(f: MultiPoly, x: str, g: MultiPoly) -> MultiPoly:
    """Exact composition: replace ``x`` by the polynomial ``g``."""
    f._check(g)
    xi = f.var_index(x)
    powers: dict[int, MultiPoly] = {0: MultiPoly.constant(f.vars, 1, f.tower)}

    def g_pow(k: int) -> MultiPoly:
        if k not in powers:
            powers[k] = g_pow(k - 1) * g
        return powers[k]

    out = MultiPoly.zero(f.vars, f.tower)
    for e, c in f.terms.items():
        rest = e[:xi] + (0,) + e[xi + 1:]
        t = MultiPoly.monomial(f.vars, rest, c, f.tower)
        out = out + t * g_pow(e[xi])
    return out

"""Framed local blow-up steps and sequences.

A step stores the unimodular exponent bookkeeping of a local blow-up along
``(u_J)`` with vertex ``j``: the forward matrix N (old variables as
monomials in the new ones) and its inverse M (new variables as Laurent
monomials in the old ones), both in SL_n(Z).

There is no ring localization here.  When a variable acquires weight zero
it is tagged as a unit (the set ``J_times``) and keeps its column; all
later centers avoid it.  Constructed steps additionally move residues: an
algebraic unit with residue theta is replaced by the new regular parameter
``u' - theta`` (a tower extension when the minimal polynomial has degree
at least 2), a transcendental unit just drops out of the official frame.
Everything downstream only ever needs this unit bookkeeping, never unit
arithmetic beyond the residue tower.

Indices are 0-based in memory and 1-based in JSON records.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from . import _linalg
from .errors import InvalidInputError
from .polyalg import FieldTower, LaurentMonomialMap, MultiPoly, QQ
from .values import Ordering, Value, compare


@dataclass(frozen=True)
class TranslationItem:
    """Residue motion for one unit variable of a constructed step.

    ``minpoly`` is the monic minimal polynomial of the residue (coefficient
    JSON encodings, lowest degree first) or None for a transcendental
    residue.  Algebraic items substitute ``u'_target = theta + new_var``;
    transcendental items only tag the variable as a unit.  ``new_weight``
    optionally records the value of the new parameter (coordinate strings)
    so that frame replay is faithful.
    """

    target: int
    minpoly: Optional[tuple] = None
    symbol: Optional[str] = None
    new_name: Optional[str] = None
    new_weight: Optional[tuple] = None

    def to_json(self) -> dict:
        return {
            "target": self.target + 1,
            "minpoly": list(self.minpoly) if self.minpoly is not None else None,
            "symbol": self.symbol,
            "new_name": self.new_name,
            "new_weight": list(self.new_weight) if self.new_weight is not None else None,
        }

    @staticmethod
    def from_json(obj: dict) -> "TranslationItem":
        mp = obj.get("minpoly")
        nw = obj.get("new_weight")
        return TranslationItem(
            target=int(obj["target"]) - 1,
            minpoly=tuple(mp) if mp is not None else None,
            symbol=obj.get("symbol"),
            new_name=obj.get("new_name"),
            new_weight=tuple(nw) if nw is not None else None,
        )


@dataclass(frozen=True)
class FramedStep:
    """One framed blow-up.  ``forward``/``inverse`` act on exponent vectors
    of the full column set (unit-tagged columns included)."""

    n_before: int
    n_after: int
    J: tuple[int, ...]
    j: int
    kind: str  # "monomial" | "translation"
    forward: LaurentMonomialMap
    inverse: LaurentMonomialMap
    J_times: tuple[int, ...] = ()
    D1: tuple[int, ...] = ()
    translation_data: tuple[TranslationItem, ...] = ()

    def __post_init__(self):
        if self.kind not in ("monomial", "translation"):
            raise InvalidInputError(f"unknown step kind {self.kind!r}")
        if self.kind == "monomial" and self.J_times:
            raise InvalidInputError("monomial steps cannot have unit variables")

    def check_unimodular(self) -> None:
        n = self.forward.n
        prod = _linalg.mat_mul(self.forward.matrix, self.inverse.matrix)
        if prod != _linalg.identity(n):
            raise InvalidInputError("forward and inverse matrices are not inverse")
        if self.forward.det() != 1:
            raise InvalidInputError("step determinant is not 1")

    def to_json(self) -> dict:
        rec = {
            "J": [i + 1 for i in self.J],
            "j": self.j + 1,
            "kind": self.kind,
            "M": self.inverse.to_json(),
            "N": self.forward.to_json(),
            "Jx": [i + 1 for i in self.J_times],
            "n_before": self.n_before,
            "n_after": self.n_after,
            "D1": [i + 1 for i in self.D1],
        }
        if self.translation_data:
            rec["translations"] = [t.to_json() for t in self.translation_data]
        return rec

    @staticmethod
    def from_json(rec: dict) -> "FramedStep":
        return FramedStep(
            n_before=int(rec["n_before"]),
            n_after=int(rec["n_after"]),
            J=tuple(int(i) - 1 for i in rec["J"]),
            j=int(rec["j"]) - 1,
            kind=rec["kind"],
            forward=LaurentMonomialMap.from_json(rec["N"]),
            inverse=LaurentMonomialMap.from_json(rec["M"]),
            J_times=tuple(int(i) - 1 for i in rec.get("Jx", ())),
            D1=tuple(int(i) - 1 for i in rec.get("D1", ())),
            translation_data=tuple(
                TranslationItem.from_json(t) for t in rec.get("translations", ())
            ),
        )


@dataclass(frozen=True)
class FramedSequence:
    steps: tuple[FramedStep, ...] = ()
    independence_set: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        cols = None
        for s in self.steps:
            if cols is not None and s.forward.n != cols:
                raise InvalidInputError("adjacent steps have incompatible variable counts")
            cols = s.forward.n
        if self.independence_set is not None:
            t = set(self.independence_set)
            for s in self.steps:
                if t & set(s.J):
                    raise InvalidInputError("sequence touches its independence set")

    def __len__(self):
        return len(self.steps)

    def to_json(self) -> dict:
        out = {"steps": [s.to_json() for s in self.steps]}
        if self.independence_set is not None:
            out["independent_of"] = [i + 1 for i in self.independence_set]
        return out

    @staticmethod
    def from_json(obj: dict) -> "FramedSequence":
        ind = obj.get("independent_of")
        return FramedSequence(
            steps=tuple(FramedStep.from_json(s) for s in obj["steps"]),
            independence_set=tuple(int(i) - 1 for i in ind) if ind is not None else None,
        )


@dataclass(frozen=True)
class Frame:
    """Variable labels, weights and unit tags of one chart."""

    names: tuple[str, ...]
    weights: tuple[Optional[Value], ...]
    units: frozenset[int] = frozenset()
    tower: FieldTower = QQ

    @property
    def n(self) -> int:
        return len(self.names)

    def active_indices(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n) if i not in self.units)

    def weight(self, i: int) -> Value:
        w = self.weights[i]
        if w is None:
            raise InvalidInputError(f"variable {self.names[i]!r} has no declared weight")
        return w

    def with_weight(self, i: int, w: Optional[Value]) -> "Frame":
        weights = list(self.weights)
        weights[i] = w
        return Frame(self.names, tuple(weights), self.units, self.tower)

    def to_json(self) -> dict:
        out = {
            "vars": list(self.names),
            "weights": [w.to_json() if w is not None else None for w in self.weights],
            "units": [i + 1 for i in sorted(self.units)],
        }
        if self.tower.depth:
            out["tower"] = self.tower.to_json()
        return out


def make_monomial_blowup(n: int, J: Sequence[int], j: int) -> FramedStep:
    """The monomial blow-up along (u_J) with vertex j: u'_i = u_i for
    i in J^c or i = j, u'_i = u_i / u_j otherwise."""
    J = tuple(sorted(set(J)))
    if not all(0 <= i < n for i in J):
        raise InvalidInputError("J out of range")
    if j not in J:
        raise InvalidInputError("vertex must belong to J")
    if len(J) < 2:
        raise InvalidInputError("center must have at least two variables")
    m = [[1 if p == q else 0 for q in range(n)] for p in range(n)]
    nmat = [[1 if p == q else 0 for q in range(n)] for p in range(n)]
    for q in J:
        if q != j:
            m[j][q] = -1
            nmat[j][q] = 1
    return FramedStep(
        n_before=n,
        n_after=n,
        J=J,
        j=j,
        kind="monomial",
        forward=LaurentMonomialMap(tuple(tuple(r) for r in nmat)),
        inverse=LaurentMonomialMap(tuple(tuple(r) for r in m)),
        J_times=(),
        D1=tuple(range(n)),
    )


def choose_vertex(J: Sequence[int], weights: Sequence[Value]) -> int:
    """Index in J of minimal weight; ties broken by smallest index."""
    J = sorted(set(J))
    if not J:
        raise InvalidInputError("empty center")
    best = J[0]
    for i in J[1:]:
        if compare(weights[i], weights[best]) is Ordering.Less:
            best = i
    return best


def pushforward_weights(
    weights: Sequence[Value], step: FramedStep
) -> tuple[Value, ...]:
    """Weights in the new frame: beta'_i = beta_i - beta_j on J minus the
    vertex, unchanged elsewhere.  All results must be >= 0."""
    out = list(weights)
    bj = weights[step.j]
    for i in step.J:
        if i != step.j:
            w = weights[i] - bj
            if w.sign() < 0:
                raise InvalidInputError(
                    "negative resulting weight: vertex was not minimal in J"
                )
            out[i] = w
    return tuple(out)


def unit_collisions(weights: Sequence[Value], J: Sequence[int], j: int) -> tuple[int, ...]:
    """Indices of J minus the vertex whose weight equals the vertex weight:
    these become units after the blow-up (the set J^times)."""
    return tuple(
        i for i in sorted(J) if i != j and compare(weights[i], weights[j]) is Ordering.Equal
    )


def build_step_for_weights(
    n: int, J: Sequence[int], j: int, weights: Sequence[Value]
) -> FramedStep:
    """Blow-up step along (u_J) at the minimal vertex j, with J_times filled
    from weight ties.  A tie makes the step a constructed (translation-kind)
    step whose unit variables are tagged, not substituted."""
    base = make_monomial_blowup(n, J, j)
    jx = unit_collisions(weights, J, j)
    if not jx:
        return base
    items = tuple(TranslationItem(target=i, minpoly=None) for i in jx)
    return FramedStep(
        n_before=n,
        n_after=n - len(jx),
        J=base.J,
        j=j,
        kind="translation",
        forward=base.forward,
        inverse=base.inverse,
        J_times=jx,
        D1=tuple(i for i in range(n) if i not in jx),
        translation_data=items,
    )


def compose_sequence(
    seq: FramedSequence, n: Optional[int] = None
) -> LaurentMonomialMap:
    """Composite forward map of a purely monomial sequence (old variables
    as monomials in the final frame); determinant 1."""
    for s in seq.steps:
        if s.kind != "monomial":
            raise InvalidInputError("not purely monomial")
    if not seq.steps:
        size = n if n is not None else 0
        return LaurentMonomialMap(_linalg.identity(size))
    total = seq.steps[0].forward
    for s in seq.steps[1:]:
        total = s.forward.compose_after(total)
    return total


def compose_forward_matrices(steps: Sequence[FramedStep], n: int) -> LaurentMonomialMap:
    """Forward composite of the matrix parts of arbitrary steps."""
    total = LaurentMonomialMap(_linalg.identity(n))
    for s in steps:
        total = s.forward.compose_after(total)
    return total


def compose_inverse_matrices(steps: Sequence[FramedStep], n: int) -> LaurentMonomialMap:
    """Inverse composite: final-frame variables as Laurent monomials in the
    original ones."""
    total = LaurentMonomialMap(_linalg.identity(n))
    for s in steps:
        total = total.compose_after(s.inverse)
    return total


def make_translation_step(
    n: int,
    target: int,
    minpoly: Optional[tuple],
    symbol: Optional[str],
    new_name: Optional[str],
    new_weight: Optional[tuple] = None,
) -> FramedStep:
    """Pure residue-motion step: identity matrices, one unit variable
    replaced by ``u' - theta`` (algebraic) or tagged (transcendental)."""
    ident = LaurentMonomialMap(_linalg.identity(n))
    item = TranslationItem(
        target=target, minpoly=minpoly, symbol=symbol,
        new_name=new_name, new_weight=new_weight,
    )
    drop = 1 if minpoly is None else 0
    return FramedStep(
        n_before=n,
        n_after=n - drop,
        J=(target,),
        j=target,
        kind="translation",
        forward=ident,
        inverse=ident,
        J_times=(target,),
        D1=tuple(i for i in range(n) if i != target),
        translation_data=(item,),
    )


def build_constructed_blowup(
    n: int,
    J: Sequence[int],
    j: int,
    weights: Sequence[Value],
    residue_spec: Sequence[dict],
) -> FramedStep:
    """The explicitly constructed framed blow-up: the monomial matrix part
    along (u_J), plus residue motion for every variable of J^times.

    ``residue_spec`` lists one entry per unit variable, in index order:
    ``{"kind": "transcendental"}`` or ``{"kind": "algebraic",
    "minpoly": [...], "symbol": ..., "new_name": ...}`` with a monic
    minimal polynomial (coefficient encodings, lowest degree first).
    """
    base = make_monomial_blowup(n, J, j)
    jx = unit_collisions(weights, J, j)
    if len(residue_spec) != len(jx):
        raise InvalidInputError("inconsistent residue_spec arity")
    if not jx:
        return base
    items = []
    drops = 0
    for i, spec in zip(jx, residue_spec):
        kind = spec.get("kind")
        if kind == "transcendental":
            items.append(TranslationItem(target=i, minpoly=None))
            drops += 1
        elif kind == "algebraic":
            mp = tuple(spec["minpoly"])
            if len(mp) < 2:
                raise InvalidInputError("minimal polynomial must have degree >= 1")
            items.append(
                TranslationItem(
                    target=i,
                    minpoly=mp,
                    symbol=spec.get("symbol"),
                    new_name=spec.get("new_name"),
                )
            )
        else:
            raise InvalidInputError("residue_spec entries need kind algebraic|transcendental")
    return FramedStep(
        n_before=n,
        n_after=n - drops,
        J=base.J,
        j=j,
        kind="translation",
        forward=base.forward,
        inverse=base.inverse,
        J_times=jx,
        D1=tuple(i for i in range(n) if i not in jx),
        translation_data=tuple(items),
    )


def apply_step_to_frame(frame: Frame, step: FramedStep) -> Frame:
    """Frame after one step: weights pushed forward, units tagged, algebraic
    residues substituted (renaming the slot and possibly extending the tower)."""
    if len(step.J) >= 2:
        weights = list(pushforward_weights(list(frame.weights), step))
    else:
        weights = list(frame.weights)
    names = list(frame.names)
    units = set(frame.units)
    tower = frame.tower
    for item in step.translation_data:
        t = item.target
        if item.minpoly is None:
            units.add(t)
        else:
            theta_coeffs = [tower.elem_from_json(c) if isinstance(c, (str, list)) else c for c in item.minpoly]
            if len(theta_coeffs) == 2:
                pass  # theta = -c0 stays inside the current tower
            else:
                sym = item.symbol or f"t{tower.depth + 1}"
                tower = tower.extend(sym, theta_coeffs)
            names[t] = item.new_name or names[t] + "'"
            units.discard(t)
            weights[t] = None
            if item.new_weight is not None:
                group = next(
                    (w.group for w in frame.weights if w is not None), None
                )
                if group is not None:
                    weights[t] = group.value(list(item.new_weight))
    return Frame(tuple(names), tuple(weights), frozenset(units), tower)


def push_polynomial_through_step(f: MultiPoly, frame_before: Frame, step: FramedStep) -> MultiPoly:
    """Image of f in the next chart.  Matrix part first, then the linear
    residue substitutions ``u'_target = theta + new_var``."""
    from .polyalg import apply_monomial_map, substitute_variable

    g = apply_monomial_map(f, step.forward) if not step.forward.is_identity() else f
    frame_after = apply_step_to_frame(frame_before, step)
    if frame_after.tower != g.tower:
        g = g.with_tower(frame_after.tower)
    for item in step.translation_data:
        if item.minpoly is None:
            continue
        tower = frame_after.tower
        if len(item.minpoly) == 2:
            c0 = tower.elem_from_json(item.minpoly[0]) if isinstance(item.minpoly[0], (str, list)) else item.minpoly[0]
            theta = tower.neg(c0)
        else:
            sym = item.symbol or f"t{tower.depth}"
            theta = tower.generator(sym)
        name = frame_after.names[item.target]
        subs = MultiPoly.constant(g.vars, theta, tower) + MultiPoly.variable(g.vars, g.vars[item.target], tower)
        g = substitute_variable(g, g.vars[item.target], subs)
        if name != g.vars[item.target]:
            g = MultiPoly(
                tuple(name if i == item.target else v for i, v in enumerate(g.vars)),
                g.terms,
                g.tower,
            )
    return g

"""Elementary uniformizing sequences and the degree-descent drivers that
monomialize key polynomials and chain-measured polynomials.

For ground variables w_1..w_r with Q-independent weights and a
distinguished variable w_n whose weight lies in their Q-span, let abar be
the least positive integer with abar*beta_n in the lattice, so that
abar*beta_n = sum alpha_i beta_i.  The pair game applied to w_n^abar
versus w^alpha runs through monomial blow-ups and ends with exactly one
weight collision; the collided variable is the degree-zero element
z = w_n^abar / w^alpha (or its inverse).  An algebraic residue z-bar with
monic minimal polynomial P yields a final translation step replacing the
unit variable by the regular parameter z - theta (a tower extension when
deg P >= 2); a transcendental residue only tags the unit and the official
frame dimension drops by one.

A perturbation h with monomial value above the quasi-homogeneous part is
absorbed first: an auxiliary run of the same game makes the image of y^d
divide the image of every perturbation term, after which the factorization
identity is checked modulo the maximal ideal exactly as in the perturbed
statement.

Every claimed identity is verified by exact polynomial arithmetic; states
that would genuinely need formal-series units (composite degree-zero
elements, residue coefficients outside the constant tower) raise
``requires completion`` instead of approximating.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from . import _linalg
from .errors import (
    InvalidInputError,
    PositiveWeightError,
    RequiresCompletionError,
    ZeroPolynomialError,
)
from .framing import (
    Frame,
    FramedSequence,
    FramedStep,
    apply_step_to_frame,
    make_translation_step,
    push_polynomial_through_step,
)
from .game import (
    DEFAULT_BUDGET,
    _antichain,
    _Budget,
    principalize_exponents,
    reduced_parts,
    run_pair_descent,
)
from .keypoly import KeyPolyChain, standard_expansion, truncated_valuation, validate_chain
from .polyalg import FieldTower, MultiPoly, QQ, euclid_divide
from .values import (
    Ordering,
    Value,
    compare,
    min_integer_multiple_in_lattice,
    value_of_exponent,
)


@dataclass(frozen=True)
class ResidueDescriptor:
    """Residue data of z-bar: transcendental, or the coefficients b_0..b_d
    of its monic minimal polynomial (JSON encodings, b_d = "1")."""

    transcendental: bool
    minpoly: Optional[tuple] = None

    def degree(self) -> int:
        return 0 if self.transcendental else len(self.minpoly) - 1

    def to_json(self):
        if self.transcendental:
            return {"kind": "transcendental"}
        return {"kind": "algebraic", "minpoly": list(self.minpoly)}

    @staticmethod
    def from_json(obj) -> "ResidueDescriptor":
        if obj.get("kind") == "transcendental":
            return ResidueDescriptor(True)
        return ResidueDescriptor(False, tuple(obj["minpoly"]))


@dataclass(frozen=True)
class UniformizingProblem:
    """Input of one elementary uniformizing sequence.

    Frame order is (w_1..w_r, v_1..v_t, w_n).  ``residue`` describes the
    residue of z.  ``h`` is an optional perturbation whose monomial value
    strictly exceeds that of the quasi-homogeneous part; ``beta_new``
    optionally declares the value of Q-tilde so the new parameter can be
    weighted in the final frame.
    """

    w_names: tuple[str, ...]
    w_weights: tuple[Value, ...]
    wn_name: str
    beta_n: Value
    residue: ResidueDescriptor
    v_names: tuple[str, ...] = ()
    v_weights: tuple[Optional[Value], ...] = ()
    h: Optional[MultiPoly] = None
    beta_new: Optional[Value] = None
    tower: FieldTower = QQ

    @property
    def names(self) -> tuple[str, ...]:
        return self.w_names + self.v_names + (self.wn_name,)

    def frame(self) -> Frame:
        names = self.names
        if len(set(names)) != len(names):
            raise InvalidInputError("variable names must be distinct")
        if len(self.v_names) != len(self.v_weights):
            raise InvalidInputError("passive variables and weights disagree")
        weights = self.w_weights + self.v_weights + (self.beta_n,)
        return Frame(names, weights, frozenset(), self.tower)


@dataclass
class UniformizingResult:
    sequence: FramedSequence
    frame: Frame
    abar: int
    alpha_coeffs: tuple[int, ...]
    d: int
    z_column: Optional[int]
    z_sign: int
    new_var: Optional[str]
    residue: ResidueDescriptor
    images: dict
    witness: dict
    records: list
    aux_steps: int = 0


def _rank_check(weights: Sequence[Value]) -> None:
    coords = tuple(tuple(w.coords) for w in weights)
    mat = tuple(
        tuple(coords[j][i] for j in range(len(weights)))
        for i in range(weights[0].group.rank)
    )
    if _linalg.rank_rational(mat) < len(weights):
        raise InvalidInputError("ground weights are not Q-linearly independent")


class _ElementaryEngine:
    """One elementary uniformizing sequence on an ambient frame.

    ``w_cols`` are the columns of the Q-independent basis and ``x_col`` the
    distinguished column; every other column rides along untouched unless a
    perturbation forces auxiliary work."""

    def __init__(
        self,
        frame: Frame,
        w_cols: Sequence[int],
        x_col: int,
        residue: ResidueDescriptor,
        budget: _Budget,
        records: list,
    ):
        self.frame = frame
        self.w_cols = tuple(w_cols)
        self.x_col = x_col
        self.residue = residue
        self.budget = budget
        self.records = records
        self.steps: list[FramedStep] = []
        self.tracked: dict[str, tuple[int, ...]] = {}
        self.abar: int = 0
        self.alpha: tuple[int, ...] = ()
        self.z_column: Optional[int] = None
        self.z_sign: int = 0
        self.new_var: Optional[str] = None
        self.aux_steps: int = 0

    # -- bookkeeping ---------------------------------------------------

    def _push_tracked(self, step: FramedStep) -> None:
        for k, e in self.tracked.items():
            self.tracked[k] = step.forward.apply_to_exponent(e)

    def _embed(self, coeffs_on_w: Sequence[int], x_power: int = 0) -> tuple[int, ...]:
        e = [0] * self.frame.n
        for c, col in zip(coeffs_on_w, self.w_cols):
            e[col] = c
        e[self.x_col] += x_power
        return tuple(e)

    # -- phases ----------------------------------------------------------

    def lattice_data(self) -> None:
        basis = [self.frame.weight(c) for c in self.w_cols]
        _rank_check(basis)
        target = self.frame.weight(self.x_col)
        if not target.is_positive():
            raise PositiveWeightError("weights must be positive")
        self.abar, self.alpha = min_integer_multiple_in_lattice(target, basis)
        pos = [max(c, 0) for c in self.alpha]
        neg = [max(-c, 0) for c in self.alpha]
        self.tracked["__delta"] = self._embed(neg, self.abar)
        self.tracked["__gamma"] = self._embed(pos, 0)

    def run_aux(self, h_exponents: Sequence[tuple[int, ...]], target: tuple[int, ...]) -> None:
        """Blow up until the target monomial reduced-divides every listed
        exponent.  Every listed value must strictly exceed the target's, so
        the game always lands the divisibility on the target side."""
        self.tracked["__target"] = tuple(target)
        keys = []
        for i, e in enumerate(h_exponents):
            k = f"__aux{i}"
            self.tracked[k] = tuple(e)
            keys.append(k)
        for k in keys:
            t, e = self.tracked["__target"], self.tracked[k]
            at, _ = reduced_parts(t, e, self.frame.units)
            if sum(at) == 0:
                continue
            _, _, self.frame, new_steps = run_pair_descent(
                t, e, self.frame, self.budget, self.records,
                on_step=lambda step, fr: self._push_tracked(step),
            )
            self.steps.extend(new_steps)
            self.aux_steps += len(new_steps)
            t, e = self.tracked["__target"], self.tracked[k]
            at, _ = reduced_parts(t, e, self.frame.units)
            if sum(at) != 0:
                raise AssertionError("auxiliary phase failed to land divisibility on y^d")
        for k in keys:
            del self.tracked[k]
        del self.tracked["__target"]

    def run_main_game(self) -> None:
        d0, g0 = self.tracked["__delta"], self.tracked["__gamma"]
        _, _, self.frame, new_steps = run_pair_descent(
            d0, g0, self.frame, self.budget, self.records,
            on_step=lambda step, fr: self._push_tracked(step),
        )
        self.steps.extend(new_steps)
        # the collision closing the main game must be its very last step
        main = new_steps
        for i, s in enumerate(main):
            if s.J_times and i != len(main) - 1:
                raise AssertionError("weight collision before the end of the main game")

    def locate_unit(self) -> None:
        delta, gamma = self.tracked["__delta"], self.tracked["__gamma"]
        diff = [a - b for a, b in zip(delta, gamma)]
        support = [i for i, x in enumerate(diff) if x != 0]
        if len(support) != 1:
            raise RequiresCompletionError(
                "requires completion: the degree-zero element is a composite unit"
            )
        q = support[0]
        if q not in self.frame.units:
            raise AssertionError("z column is not unit-tagged")
        m = diff[q]
        if abs(m) != 1:
            raise AssertionError("z column carries a non-primitive exponent")
        self.z_column, self.z_sign = q, m

    def _oriented_minpoly(self, tower: FieldTower) -> tuple:
        """Minimal polynomial of the residue of the unit *variable*: P when
        z equals that variable, the normalized reciprocal when 1/z does."""
        mp = [
            tower.elem_from_json(c) if isinstance(c, (str, list)) else c
            for c in self.residue.minpoly
        ]
        if self.z_sign == 1:
            coeffs = mp
        else:
            b0 = mp[0]
            if tower.is_zero(b0):
                raise InvalidInputError("residue minimal polynomial must have b_0 != 0")
            inv = tower.inv(b0)
            coeffs = [tower.mul(mp[len(mp) - 1 - i], inv) for i in range(len(mp))]
        return tuple(tower.elem_to_json(c) for c in coeffs)

    def translate(self, new_weight: Optional[Value]) -> None:
        """Replace the unit variable by the regular parameter z - theta."""
        if self.residue.transcendental:
            return
        q = self.z_column
        tower = self.frame.tower
        mp = self._oriented_minpoly(tower)
        symbol = None
        if len(mp) > 2:
            k = tower.depth + 1
            taken = {s for s, _ in tower.extensions}
            while f"t{k}" in taken:
                k += 1
            symbol = f"t{k}"
        new_name = self._fresh_name(self.frame.names[q])
        encoded_weight = None
        if new_weight is not None:
            if not new_weight.is_positive():
                raise InvalidInputError("the new parameter must have positive value")
            encoded_weight = tuple(w for w in new_weight.to_json()["coords"])
        step = make_translation_step(
            self.frame.n, q, mp, symbol, new_name, encoded_weight
        )
        self.frame = apply_step_to_frame(self.frame, step)
        self.steps.append(step)
        self.records.append(
            {
                "step": len(self.records) + 1,
                "translation": {
                    "target": q + 1,
                    "minpoly": list(mp),
                    "symbol": symbol,
                    "new_name": new_name,
                },
            }
        )
        self.new_var = new_name

    def _fresh_name(self, base: str) -> str:
        name = base + "'"
        while name in self.frame.names:
            name += "'"
        return name

    def forward_total(self, n: int) -> tuple[tuple[int, ...], ...]:
        total = _linalg.identity(n)
        for s in self.steps:
            total = _linalg.mat_mul(s.forward.matrix, total)
        return total


def _split_unit_part(
    exponent: Sequence[int], frame: Frame, z_column: Optional[int]
) -> tuple[tuple[int, ...], dict, int]:
    drop = set(frame.units)
    zp = 0
    if z_column is not None:
        zp = exponent[z_column]
        drop.add(z_column)
    mono = tuple(0 if i in drop else x for i, x in enumerate(exponent))
    units = {
        frame.names[i]: exponent[i]
        for i in frame.units
        if exponent[i] != 0 and i != z_column
    }
    return mono, units, zp


def elementary_uniformizing_sequence(
    problem: UniformizingProblem,
    budget: int = DEFAULT_BUDGET,
    auto_independence: bool = True,
) -> UniformizingResult:
    """Uniformize the quasi-homogeneous element attached to the problem:
    run the pair game on w_n^abar versus w^alpha, replace the resulting
    degree-zero variable by the new regular parameter, and verify the
    factorization of Q-tilde by exact arithmetic."""
    frame0 = problem.frame()
    r = len(problem.w_names)
    n = frame0.n
    w_cols = tuple(range(r))
    x_col = n - 1
    v_cols = tuple(range(r, n - 1))
    for w in problem.w_weights:
        if not w.is_positive():
            raise PositiveWeightError("weights must be positive")
    records: list = []
    engine = _ElementaryEngine(
        frame0, w_cols, x_col, problem.residue, _Budget(budget), records
    )
    engine.lattice_data()
    abar, alpha = engine.abar, engine.alpha
    d = problem.residue.degree()
    tower = problem.tower
    if not problem.residue.transcendental:
        mp = [
            tower.elem_from_json(c) if isinstance(c, (str, list)) else c
            for c in problem.residue.minpoly
        ]
        if d < 1 or not tower.eq(mp[-1], tower.one()):
            raise InvalidInputError(
                "residue minimal polynomial must be monic of degree >= 1"
            )
        if tower.is_zero(mp[0]):
            raise InvalidInputError("residue minimal polynomial must have b_0 != 0")

    # Q-tilde cleared of the Laurent denominator:
    #   Q * w^(d*neg) = sum_i b_i w^((d-i)*pos + i*neg) w_n^(i*abar)
    pos = [max(c, 0) for c in alpha]
    neg = [max(-c, 0) for c in alpha]
    q_cleared = None
    if not problem.residue.transcendental:
        terms = {}
        for i in range(d + 1):
            e = [0] * n
            for cp, cm, col in zip(pos, neg, w_cols):
                e[col] = (d - i) * cp + i * cm
            e[x_col] = i * abar
            terms[tuple(e)] = mp[i]
        q_cleared = MultiPoly.build(frame0.names, terms, tower)

    h = problem.h
    h_touches_v = False
    if h is not None and not h.is_zero():
        if problem.residue.transcendental:
            raise InvalidInputError("a perturbation needs an algebraic residue")
        h = h.with_vars(frame0.names)
        if h.tower != tower:
            h = h.with_tower(tower)
        h_touches_v = any(h.degree_in(vn) > 0 for vn in problem.v_names)
        weights_all = list(frame0.weights)
        if any(w is None for w in weights_all):
            raise InvalidInputError("perturbation runs need declared weights everywhere")
        neg_shift = tuple([d * m for m in neg] + [0] * len(v_cols) + [0])
        target = tuple([d * p for p in pos] + [0] * len(v_cols) + [0])
        v_q = value_of_exponent(target, weights_all)
        h_terms = {}
        for e, c in h.terms.items():
            ne = tuple(a + b for a, b in zip(e, neg_shift))
            if compare(value_of_exponent(ne, weights_all), v_q) is not Ordering.Greater:
                raise InvalidInputError(
                    "perturbation must have monomial value above the quasi-homogeneous part"
                )
            h_terms[ne] = c
        h_cleared = MultiPoly.build(frame0.names, h_terms, tower)
        q_cleared = q_cleared + h_cleared
        engine.run_aux(list(h_cleared.terms.keys()), target)

    engine.run_main_game()
    engine.locate_unit()
    x_weight = None
    if problem.beta_new is not None and not problem.residue.transcendental:
        x_weight = problem.beta_new - problem.beta_n.scale(abar * d)
    engine.translate(x_weight)
    frame = engine.frame
    steps = engine.steps

    # images of w_1..w_r, w_n: monomial in the final actives times z-powers
    total = engine.forward_total(n)
    inv_total = _linalg.inverse_int(total)
    if inv_total is None or _linalg.mat_mul(total, inv_total) != _linalg.identity(n):
        raise AssertionError("composed sequence is not unimodular")
    images = {}
    for col in list(w_cols) + [x_col]:
        e = tuple(row[col] for row in total)
        mono, units, zp = _split_unit_part(e, frame, engine.z_column)
        images[frame0.names[col]] = {
            "monomial": list(mono),
            "unit_exponents": units,
            "z_power": zp,
        }
        # conclusion: the image of a w-variable never touches a passive column
        if not h_touches_v:
            for vcol in v_cols:
                if e[vcol] != 0:
                    raise AssertionError("image of a w-variable touches a passive variable")

    witness = _verify_factorization(engine, frame0, q_cleared, pos, problem, steps)

    independence = tuple(v_cols) if (auto_independence and not h_touches_v) else None
    return UniformizingResult(
        sequence=FramedSequence(tuple(steps), independence),
        frame=frame,
        abar=abar,
        alpha_coeffs=alpha,
        d=d,
        z_column=engine.z_column,
        z_sign=engine.z_sign,
        new_var=engine.new_var,
        residue=problem.residue,
        images=images,
        witness=witness,
        records=records,
        aux_steps=engine.aux_steps,
    )


def _push_polynomial(poly: MultiPoly, frame0: Frame, steps: Sequence[FramedStep]) -> MultiPoly:
    img = poly
    fr = frame0
    for s in steps:
        img = push_polynomial_through_step(img, fr, s)
        fr = apply_step_to_frame(fr, s)
        img = MultiPoly(fr.names, img.terms, img.tower)
    return img


def _verify_factorization(
    engine: _ElementaryEngine,
    frame0: Frame,
    q_cleared: Optional[MultiPoly],
    pos: Sequence[int],
    problem: UniformizingProblem,
    steps: Sequence[FramedStep],
) -> dict:
    """Exact identity behind the factorization of Q-tilde.

    Unperturbed: image(Q~ * w^(d neg)) = w^div * X * U with U a unit whose
    constant part is P'(theta).  Perturbed: the quotient W still satisfies
    W - P(theta + X) of strictly positive value, the perturbed analogue of
    the same conclusion.
    """
    if q_cleared is None:
        return {"kind": "transcendental"}
    n = frame0.n
    d = engine.residue.degree()
    matrix_steps = list(steps[:-1] if engine.new_var is not None else steps)
    img_pre = _push_polynomial(q_cleared, frame0, matrix_steps)
    frame = engine.frame
    tower = frame.tower
    total = engine.forward_total(n)
    e_plus = [0] * n
    for c, col in zip(pos, engine.w_cols):
        if c:
            for p in range(n):
                e_plus[p] += d * c * total[p][col]
    q = engine.z_column
    div = list(e_plus)
    # unit columns are invertible: lower the divisor there so the monomial
    # division stays polynomial (the difference is a unit factor)
    pre_units = set(engine.frame.units) | {q}
    for col in pre_units:
        col_min = min(e[col] for e in img_pre.terms)
        div[col] = min(div[col], col_min)
    w_terms = {}
    for e, c in img_pre.terms.items():
        ne = tuple(a - b for a, b in zip(e, div))
        if any(x < 0 for x in ne):
            raise AssertionError("factorization: monomial division failed")
        w_terms[ne] = c
    w_pre = MultiPoly(img_pre.vars, w_terms, img_pre.tower)
    result = {
        "kind": "algebraic",
        "monomial_exponent": [int(x) for x in div],
        "unit_z_shift": int(e_plus[q] - div[q]),
    }
    if engine.new_var is None:
        result["quotient"] = w_pre.to_json()
        return result
    # substitute the unit variable and compare with P(theta + X)
    pre_frame = frame0
    for s in matrix_steps:
        pre_frame = apply_step_to_frame(pre_frame, s)
    w_poly = push_polynomial_through_step(
        MultiPoly(pre_frame.names, w_pre.terms, w_pre.tower), pre_frame, steps[-1]
    )
    w_poly = MultiPoly(frame.names, w_poly.terms, w_poly.tower)
    tower = frame.tower
    result["quotient"] = w_poly.to_json()
    x_name = engine.new_var
    mp = engine._oriented_minpoly(tower)
    coeffs = [tower.elem_from_json(c) for c in mp]
    if len(coeffs) == 2:
        theta = tower.neg(coeffs[0])
    else:
        theta = tower.generator(steps[-1].translation_data[0].symbol)
    z_image = MultiPoly.constant(w_poly.vars, theta, tower) + MultiPoly.variable(
        w_poly.vars, x_name, tower
    )
    p_of_z = MultiPoly.zero(w_poly.vars, tower)
    power = MultiPoly.constant(w_poly.vars, 1, tower)
    for c in coeffs:
        p_of_z = p_of_z + power.scale(c)
        power = power * z_image
    diff = w_poly - p_of_z
    if problem.h is None or problem.h.is_zero():
        if not diff.is_zero():
            raise AssertionError("factorization: quotient differs from P(z)")
        x_var = MultiPoly.variable(w_poly.vars, x_name, tower)
        quo, rem = euclid_divide(w_poly, x_var, x_name)
        if not rem.is_zero():
            raise AssertionError("factorization: new parameter fails to divide")
        const = quo.constant_term()
        if tower.is_zero(const):
            raise AssertionError("factorization: cofactor is not a unit")
        result["unit_cofactor"] = quo.to_json()
        result["unit_constant"] = tower.elem_to_json(const)
        result["exact"] = True
    else:
        for e in diff.terms:
            if not any(e[i] > 0 for i in range(len(e)) if i not in frame.units):
                raise AssertionError("perturbation escaped the maximal ideal")
        result["perturbation_tail"] = diff.to_json()
        result["exact"] = False
    return result


# ---------------------------------------------------------------------------
# drivers
# ---------------------------------------------------------------------------


@dataclass
class KeyPolyWitness:
    entry: int
    monomial: tuple[int, ...]
    unit: MultiPoly
    image: MultiPoly
    x_multiplicity: int


@dataclass
class KeyPolyResult:
    sequence: FramedSequence
    frame: Frame
    x_column: int
    witnesses: list[KeyPolyWitness]
    records: list
    level_data: list


def _frame_weights_for_values(frame: Frame) -> list[Value]:
    ws = []
    for i in range(frame.n):
        w = frame.weights[i]
        if w is None:
            raise InvalidInputError(f"variable {frame.names[i]!r} lacks a weight")
        ws.append(w)
    return ws


def _poly_min_value(poly: MultiPoly, weights: Sequence[Value]) -> Value:
    best = None
    for e in poly.terms:
        v = value_of_exponent(e, weights)
        if best is None or compare(v, best) is Ordering.Less:
            best = v
    if best is None:
        raise ZeroPolynomialError("zero polynomial has no value")
    return best


def monomialize_key_polys(
    chain: KeyPolyChain,
    budget: int = DEFAULT_BUDGET,
    auto_independence: bool = True,
) -> KeyPolyResult:
    """Iterated elementary sequences along a valid chain: after the run,
    every key polynomial is a monomial in the final frame multiplied by a
    unit, and the distinguished parameter divides the top key polynomial
    exactly once."""
    issues = validate_chain(chain)
    if issues:
        raise InvalidInputError("chain invalid: " + ", ".join(issues))
    ground_n = len(chain.ground.vars)
    names0 = chain.all_vars
    weights0 = chain.ground.weights + (chain.beta(1),)
    frame = Frame(names0, weights0, frozenset(), QQ)
    frame0 = frame
    budget_ = _Budget(budget)
    records: list = []
    all_steps: list[FramedStep] = []
    # maximal Q-independent subset of the ground weights, greedily by index
    basis_cols: list[int] = []
    for i in range(ground_n):
        coords = [list(chain.ground.weights[j].coords) for j in basis_cols + [i]]
        if _linalg.rank_rational(tuple(tuple(Fraction(x) for x in row) for row in zip(*coords))) == len(coords):
            basis_cols.append(i)
    x_col = frame.n - 1
    level_data = []

    for q in range(1, len(chain)):
        target_poly = chain.Q(q + 1).with_vars(names0)
        t_img = _push_polynomial(target_poly, frame0, all_steps)
        weights = _frame_weights_for_values(frame)
        vx = frame.weight(x_col)
        basis_weights = [frame.weight(c) for c in basis_cols]
        abar, alpha_vec = min_integer_multiple_in_lattice(vx, basis_weights)
        # the value-minimal part of the pushed key polynomial is the ladder
        # w^(m_0) * sum kappa_i z^i with z = X^abar / w^lambda; unit factors
        # from earlier translations only contribute their residue constants
        vmin = _poly_min_value(t_img, weights)
        initial = {
            e: c
            for e, c in t_img.terms.items()
            if compare(value_of_exponent(e, weights), vmin) is Ordering.Equal
        }
        tower = frame.tower
        kappa: dict[int, object] = {}
        ladders: dict[int, tuple[int, ...]] = {}
        for e, c in initial.items():
            if any(e[i] for i in frame.units):
                raise RequiresCompletionError(
                    "requires completion: residue coefficients involve transcendental units"
                )
            b = e[x_col]
            if b % abar:
                raise RequiresCompletionError(
                    "requires completion: initial support off the lattice progression"
                )
            i = b // abar
            if i in kappa:
                raise RequiresCompletionError(
                    "requires completion: residue coefficients leave the constant field"
                )
            kappa[i] = c
            ladders[i] = e
        if 0 not in ladders:
            raise RequiresCompletionError(
                "requires completion: initial form is not a z-polynomial with unit ends"
            )
        d = max(ladders)
        if d < 1:
            raise RequiresCompletionError(
                "requires completion: initial form does not involve the parameter"
            )
        m0 = ladders[0]
        for i, e in ladders.items():
            expect = list(m0)
            for cc, col in zip(alpha_vec, basis_cols):
                expect[col] -= i * cc
            expect[x_col] += i * abar
            if list(e) != expect:
                raise RequiresCompletionError(
                    "requires completion: initial monomials break the lattice ladder"
                )
        kd = kappa[d]
        kd_inv = tower.inv(kd)
        bcoeffs = []
        for i in range(d + 1):
            if i in kappa:
                bcoeffs.append(tower.elem_to_json(tower.mul(kappa[i], kd_inv)))
            else:
                bcoeffs.append(tower.elem_to_json(tower.zero()))
        residue = ResidueDescriptor(False, tuple(bcoeffs))
        engine = _ElementaryEngine(frame, tuple(basis_cols), x_col, residue, budget_, records)
        engine.lattice_data()
        if engine.abar != abar:
            raise AssertionError("lattice index changed between analysis and run")
        # tail terms above the minimum must become divisible by the image of
        # the minimal initial monomial w^(m_0) before the residue can move
        tail_exps = [
            e
            for e in t_img.terms
            if compare(value_of_exponent(e, weights), vmin) is Ordering.Greater
        ]
        if tail_exps:
            engine.run_aux(tail_exps, m0)
        engine.run_main_game()
        engine.locate_unit()
        jump = chain.beta(q + 1) - vmin
        if jump.sign() <= 0:
            raise AssertionError("value jump is not positive")
        engine.translate(jump)
        all_steps.extend(engine.steps)
        frame = engine.frame
        x_col = engine.z_column
        level_data.append(
            {
                "level": q + 1,
                "abar": abar,
                "alpha": list(alpha_vec),
                "d": d,
                "minpoly": list(residue.minpoly),
                "z_sign": engine.z_sign,
                "new_var": engine.new_var,
            }
        )

    # witnesses: every key polynomial is monomial * unit; the top one is
    # divisible by the distinguished parameter exactly once
    witnesses = []
    x_name = frame.names[x_col]
    for i in range(1, len(chain) + 1):
        img = _push_polynomial(chain.Q(i).with_vars(names0), frame0, all_steps)
        mono = _common_monomial(img, frame)
        unit = _shift_by_monomial(img, mono)
        if not _has_unit_term(unit, frame):
            # residual terms that only a formal-series parameter absorbs
            raise RequiresCompletionError(
                f"requires completion: key polynomial {i} keeps a residual "
                "perturbation in the final frame"
            )
        mult = 0
        if i == len(chain) and len(chain) >= 2:
            probe = unit
            x_var = MultiPoly.variable(img.vars, x_name, img.tower)
            mult = mono[x_col]
            while True:
                quo, rem = euclid_divide(probe, x_var, x_name)
                if rem.is_zero():
                    mult += 1
                    probe = quo
                else:
                    break
        witnesses.append(
            KeyPolyWitness(
                entry=i,
                monomial=mono,
                unit=unit,
                image=img,
                x_multiplicity=mult,
            )
        )
    return KeyPolyResult(
        sequence=FramedSequence(tuple(all_steps), None),
        frame=frame,
        x_column=x_col,
        witnesses=witnesses,
        records=records,
        level_data=level_data,
    )


def _common_monomial(poly: MultiPoly, frame: Frame) -> tuple[int, ...]:
    """Componentwise minimum of the exponents, active columns only."""
    if poly.is_zero():
        raise ZeroPolynomialError("zero polynomial has no value")
    mins = None
    for e in poly.terms:
        mins = list(e) if mins is None else [min(a, b) for a, b in zip(mins, e)]
    return tuple(0 if i in frame.units else x for i, x in enumerate(mins))


def _shift_by_monomial(poly: MultiPoly, mono: Sequence[int]) -> MultiPoly:
    out = {}
    for e, c in poly.terms.items():
        ne = tuple(a - b for a, b in zip(e, mono))
        if any(x < 0 for x in ne):
            raise AssertionError("monomial division failed")
        out[ne] = c
    return MultiPoly(poly.vars, out, poly.tower)


def _has_unit_term(poly: MultiPoly, frame: Frame) -> bool:
    return any(
        all(x == 0 for i, x in enumerate(e) if i not in frame.units)
        for e in poly.terms
    )


@dataclass
class PolyMonoResult:
    sequence: FramedSequence
    exponent: tuple[int, ...]
    unit_witness: MultiPoly
    frame: Frame
    records: list
    image: MultiPoly
    expansion_values: list


def monomialize_polynomial(
    f: MultiPoly,
    chain: KeyPolyChain,
    budget: int = DEFAULT_BUDGET,
    auto_independence: bool = True,
) -> PolyMonoResult:
    """Monomialize a polynomial measured by the chain's top truncation:
    monomialize the key polynomials, push f through, and principalize the
    exponents of the image; the quotient by the surviving monomial is the
    unit witness."""
    if f.is_zero():
        raise ZeroPolynomialError("zero polynomial has no value")
    f = f.with_vars(chain.all_vars)
    top = len(chain)
    exp = standard_expansion(f, chain, top)
    beta_top = chain.beta(top)
    term_values = []
    for j, c in enumerate(exp.coefficients):
        if c.is_zero():
            continue
        v = beta_top.scale(j) + (
            truncated_valuation(c, chain, top - 1)
            if top > 1
            else _ground_coeff_value(c, chain)
        )
        term_values.append((j, v))
    v_min = min(v for _, v in term_values)
    expansion_values = [
        {
            "j": j,
            "value": v.to_json(),
            "attains_min": compare(v, v_min) is Ordering.Equal,
        }
        for j, v in term_values
    ]

    kp = monomialize_key_polys(chain, budget, auto_independence)
    if f == chain.Q(top).with_vars(chain.all_vars):
        w = kp.witnesses[-1]
        return PolyMonoResult(
            sequence=kp.sequence,
            exponent=w.monomial,
            unit_witness=w.unit,
            frame=kp.frame,
            records=kp.records,
            image=w.image,
            expansion_values=expansion_values,
        )
    records = list(kp.records)
    frame = kp.frame
    frame0 = Frame(chain.all_vars, chain.ground.weights + (chain.beta(1),), frozenset(), QQ)
    img = _push_polynomial(f, frame0, list(kp.sequence.steps))
    gens = _antichain(sorted(img.terms.keys(), key=lambda e: (sum(e), e)))
    survivor, exps, frame, steps, _ = principalize_exponents(
        gens, frame, _Budget(budget), records
    )
    img = _push_polynomial(img, kp.frame, steps)
    mono = tuple(
        0 if i in frame.units else x for i, x in enumerate(exps[survivor])
    )
    witness = _shift_by_monomial(img, mono)
    if not _has_unit_term(witness, frame):
        raise RequiresCompletionError(
            "requires completion: the cofactor is not a polynomial unit"
        )
    return PolyMonoResult(
        sequence=FramedSequence(tuple(kp.sequence.steps) + tuple(steps), None),
        exponent=mono,
        unit_witness=witness,
        frame=frame,
        records=records,
        image=img,
        expansion_values=expansion_values,
    )


def _ground_coeff_value(c: MultiPoly, chain: KeyPolyChain) -> Value:
    from .keypoly import _coefficient_value

    return _coefficient_value(c, chain, 0)

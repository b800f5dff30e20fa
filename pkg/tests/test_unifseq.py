"""Elementary uniformizing sequences and the monomialization drivers."""

from fractions import Fraction

import pytest

from conftest import binomial_chain, poly, rational_spec
from valmono import _linalg
from valmono.errors import InvalidInputError
from valmono.framing import apply_step_to_frame, push_polynomial_through_step
from valmono.keypoly import KeyPolyChain, validate_chain
from valmono.polyalg import MultiPoly, QQ
from valmono.unifseq import (
    ResidueDescriptor,
    UniformizingProblem,
    elementary_uniformizing_sequence,
    monomialize_key_polys,
    monomialize_polynomial,
)
from valmono.values import ValueGroup

G1 = ValueGroup(1)
UV = ("u", "x")


def cusp_problem(**kw):
    return UniformizingProblem(
        w_names=("w1",),
        w_weights=(G1.rational(2),),
        wn_name="wn",
        beta_n=G1.rational(3),
        residue=ResidueDescriptor(False, ("-1", "1")),
        **kw,
    )


def test_linear_case():
    # Q = w_n - w_1 with beta_n = beta_1: abar = 1, one blow-up,
    # w_n^(l) = z - 1, residue polynomial X - 1
    prob = UniformizingProblem(
        w_names=("w1",),
        w_weights=(G1.rational(1),),
        wn_name="wn",
        beta_n=G1.rational(1),
        residue=ResidueDescriptor(False, ("-1", "1")),
    )
    res = elementary_uniformizing_sequence(prob)
    assert res.abar == 1 and res.alpha_coeffs == (1,)
    matrix_steps = [s for s in res.sequence.steps if not s.forward.is_identity()]
    assert len(matrix_steps) == 1
    assert res.witness["exact"] is True
    # quotient is exactly the new variable (z - 1)
    assert res.witness["quotient"]["terms"] == [{"e": [0, 1], "c": "1"}]
    assert res.residue.minpoly == ("-1", "1")


def test_cusp_all_conclusions():
    res = elementary_uniformizing_sequence(cusp_problem())
    n = 2
    # (1) every step before the final collision is monomial
    kinds = [s.kind for s in res.sequence.steps]
    assert all(k == "monomial" for k in kinds[:-2])
    assert res.sequence.steps[-1].kind == "translation"
    # (2) P != 0: official dimension stays n
    assert len(res.frame.active_indices()) == n
    # (3) w_1 and w_n are monomials in the final actives times a unit
    assert res.images["w1"]["monomial"] == [2, 0] and res.images["w1"]["z_power"] == 1
    assert res.images["wn"]["monomial"] == [3, 0] and res.images["wn"]["z_power"] == 2
    # (4) final variables are Laurent monomials in the old ones (unimodular)
    total = _linalg.identity(n)
    for s in res.sequence.steps:
        total = _linalg.mat_mul(s.forward.matrix, total)
    inv = _linalg.inverse_int(total)
    assert inv is not None and _linalg.mat_mul(total, inv) == _linalg.identity(n)
    # (5) image(Q) = y * (image of w_n^(l)) exactly: unit cofactor 1
    assert res.witness["exact"] is True
    assert res.witness["unit_constant"] == "1"
    assert res.witness["quotient"]["terms"] == [{"e": [0, 1], "c": "1"}]
    assert res.witness["monomial_exponent"] == [6, 3]
    # (6) residue extension is k[X]/(X - 1) = k
    assert res.residue.to_json() == {"kind": "algebraic", "minpoly": ["-1", "1"]}
    assert res.frame.tower == QQ
    assert res.d == 1 and res.abar == 2 and res.alpha_coeffs == (3,)


def test_transcendental_case_drops_dimension():
    prob = UniformizingProblem(
        w_names=("w1",),
        w_weights=(G1.rational(2),),
        wn_name="wn",
        beta_n=G1.rational(3),
        residue=ResidueDescriptor(True),
    )
    res = elementary_uniformizing_sequence(prob)
    assert res.new_var is None
    assert len(res.frame.active_indices()) == 1  # n - 1
    assert res.frame.units == frozenset({res.z_column})
    assert res.witness == {"kind": "transcendental"}


def test_passive_variables_ride_along():
    prob = UniformizingProblem(
        w_names=("w1",),
        w_weights=(G1.rational(2),),
        wn_name="wn",
        beta_n=G1.rational(3),
        residue=ResidueDescriptor(False, ("-1", "1")),
        v_names=("v1",),
        v_weights=(G1.rational(5),),
    )
    res = elementary_uniformizing_sequence(prob)
    assert res.sequence.independence_set == (1,)
    for s in res.sequence.steps:
        assert 1 not in s.J
    # v column untouched in the composed matrix
    total = _linalg.identity(3)
    for s in res.sequence.steps:
        total = _linalg.mat_mul(s.forward.matrix, total)
    assert tuple(row[1] for row in total) == (0, 1, 0)
    assert total[1] == (0, 1, 0)


def test_perturbed_cusp():
    # Q~ = (wn^2 - w1^3) + w1^4, nu_0(h) = 8 > 6 = nu_0(Q)
    h = MultiPoly.build(("w1", "wn"), {(4, 0): QQ.from_rational(1)})
    res = elementary_uniformizing_sequence(cusp_problem(h=h))
    assert res.witness["exact"] is False
    assert res.witness["kind"] == "algebraic"
    # the factorization divided exactly and the tail stays in the ideal
    assert "perturbation_tail" in res.witness
    # the perturbation value condition is enforced
    bad = MultiPoly.build(("w1", "wn"), {(3, 0): QQ.from_rational(1)})
    with pytest.raises(InvalidInputError):
        elementary_uniformizing_sequence(cusp_problem(h=bad))


def test_degree_two_residue_extends_tower():
    # Q = wn^2 - 2 w1^2 with beta = (1, 1): abar = 1, z = wn/w1,
    # z-bar^2 = 2: minimal polynomial X^2 - 2
    prob = UniformizingProblem(
        w_names=("w1",),
        w_weights=(G1.rational(1),),
        wn_name="wn",
        beta_n=G1.rational(1),
        residue=ResidueDescriptor(False, ("-2", "0", "1")),
    )
    res = elementary_uniformizing_sequence(prob)
    assert res.d == 2 and res.abar == 1
    assert res.frame.tower.depth == 1
    sym = res.frame.tower.extensions[0][0]
    # unit cofactor is X + 2 theta, constant part 2 theta, P'(theta) != 0
    assert res.witness["exact"] is True
    tower = res.frame.tower
    const = tower.elem_from_json(res.witness["unit_constant"])
    assert tower.eq(const, tower.scale(tower.generator(sym), 2))
    # verify the full identity by reconstruction: image(Q) = w^div * X * U
    q_poly = MultiPoly.build(
        ("w1", "wn"), {(0, 2): QQ.from_rational(1), (2, 0): QQ.from_rational(-2)}
    )
    frame0 = prob.frame()
    img = q_poly
    fr = frame0
    for s in res.sequence.steps:
        img = push_polynomial_through_step(img, fr, s)
        fr = apply_step_to_frame(fr, s)
        img = MultiPoly(fr.names, img.terms, img.tower)
    div = res.witness["monomial_exponent"]
    x_var = MultiPoly.variable(fr.names, res.new_var, tower)
    mono = MultiPoly.monomial(fr.names, div, 1, tower)
    cof = MultiPoly.from_json(res.witness["unit_cofactor"], tower)
    cof = MultiPoly(fr.names, cof.terms, tower)
    assert mono * x_var * cof == img


def test_inverted_direction():
    # beta_n < beta_1 puts z on the other side: 1/z is the unit variable
    prob = UniformizingProblem(
        w_names=("w1",),
        w_weights=(G1.rational(3),),
        wn_name="wn",
        beta_n=G1.rational(2),
        residue=ResidueDescriptor(False, ("-1", "1")),
    )
    res = elementary_uniformizing_sequence(prob)
    assert res.witness["exact"] is True
    assert res.z_sign in (-1, 1)


def test_keypoly_driver_cusp():
    chain_ = cusp()
    res = monomialize_key_polys(chain_)
    assert [w.entry for w in res.witnesses] == [1, 2]
    top = res.witnesses[-1]
    assert top.x_multiplicity == 1
    # image of Q_2 = monomial * unit with the unit's constant term nonzero
    unit_const = top.unit.constant_term()
    assert not top.unit.tower.is_zero(unit_const)
    # new parameter has the declared jump value 4 - 3 = 1
    assert res.frame.weights[res.x_column].coords == (Fraction(1),)


def cusp():
    ground = rational_spec([1], names=("u",))
    q1 = MultiPoly.variable(UV, "x")
    q2 = poly(UV, {(0, 2): 1, (3, 0): -1})
    return KeyPolyChain(
        ground, "x", ((q1, G1.rational(Fraction(3, 2))), (q2, G1.rational(4)))
    )


def test_keypoly_driver_translation_chain():
    # alpha_2 = 1: Q_2 = x + u, handled by the translation branch
    ground = rational_spec([1], names=("u",))
    q1 = MultiPoly.variable(UV, "x")
    q2 = poly(UV, {(0, 1): 1, (1, 0): 1})
    chain = KeyPolyChain(ground, "x", ((q1, G1.rational(1)), (q2, G1.rational(2))))
    assert validate_chain(chain) == []
    res = monomialize_key_polys(chain)
    assert res.witnesses[-1].x_multiplicity == 1
    assert res.level_data[0]["abar"] == 1 and res.level_data[0]["d"] == 1


def test_keypoly_driver_single_entry():
    ground = rational_spec([1], names=("u",))
    chain = KeyPolyChain(
        ground, "x", ((MultiPoly.variable(UV, "x"), G1.rational(Fraction(3, 2))),)
    )
    res = monomialize_key_polys(chain)
    assert len(res.sequence.steps) == 0
    assert res.witnesses[0].monomial[res.x_column] == 1


def test_keypoly_driver_invalid_chain_rejected():
    ground = rational_spec([1], names=("u",))
    q1 = MultiPoly.variable(UV, "x")
    q2 = poly(UV, {(0, 2): 1, (3, 0): -1})
    bad = KeyPolyChain(ground, "x", ((q1, G1.rational(2)), (q2, G1.rational(1))))
    with pytest.raises(InvalidInputError):
        monomialize_key_polys(bad)


def test_keypoly_driver_random_binomials(rng):
    for _ in range(15):
        chain = binomial_chain(rng, allow_extension=False)
        res = monomialize_key_polys(chain)
        assert res.witnesses[-1].x_multiplicity == 1
        for w in res.witnesses:
            assert any(
                all(x == 0 for i, x in enumerate(e) if i not in res.frame.units)
                for e in w.unit.terms
            )


def test_monomialize_polynomial_examples():
    chain = cusp()
    # f = Q_top delegates to the chain driver
    res = monomialize_polynomial(chain.Q(2), chain)
    assert res.exponent[res.frame.names.index("x'")] == 1
    # f = u^3 x: monomial after pushing, no recursion
    f = poly(UV, {(3, 1): 1})
    res2 = monomialize_polynomial(f, chain)
    mono = MultiPoly.monomial(res2.image.vars, res2.exponent, 1, res2.image.tower)
    assert mono * res2.unit_witness == res2.image
    # f = x^3: single minimal term at mu'_2 = 9/2
    res3 = monomialize_polynomial(poly(UV, {(0, 3): 1}), chain)
    assert [d["attains_min"] for d in res3.expansion_values] == [True, False]
    mono3 = MultiPoly.monomial(res3.image.vars, res3.exponent, 1, res3.image.tower)
    assert mono3 * res3.unit_witness == res3.image
    const = res3.unit_witness.constant_term()
    assert not res3.unit_witness.tower.is_zero(const)


def test_monomialize_polynomial_random(rng):
    for _ in range(15):
        chain = binomial_chain(rng, allow_extension=False)
        f = poly(UV, {(rng.randint(0, 4), rng.randint(0, 4)): rng.choice([1, 2, -1]),
                      (rng.randint(0, 4), rng.randint(0, 4)): rng.choice([1, 3, -2])})
        if f.is_zero():
            continue
        res = monomialize_polynomial(f, chain)
        mono = MultiPoly.monomial(res.image.vars, res.exponent, 1, res.image.tower)
        assert mono * res.unit_witness == res.image
        assert any(
            all(x == 0 for i, x in enumerate(e) if i not in res.frame.units)
            for e in res.unit_witness.terms
        )


def test_keypoly_driver_translation_tower():
    # depth-3 tower of translation keys stays polynomial-exact
    ground = rational_spec([1], names=("u",))
    q1 = MultiPoly.variable(UV, "x")
    q2 = poly(UV, {(0, 1): 1, (1, 0): 1})  # x + u
    q3 = q2 + poly(UV, {(2, 0): 1})  # x + u + u^2
    chain = KeyPolyChain(
        ground,
        "x",
        ((q1, G1.rational(1)), (q2, G1.rational(2)), (q3, G1.rational(3))),
    )
    assert validate_chain(chain) == []
    res = monomialize_key_polys(chain)
    assert res.witnesses[-1].x_multiplicity == 1
    for w in res.witnesses:
        assert any(
            all(x == 0 for i, x in enumerate(e) if i not in res.frame.units)
            for e in w.unit.terms
        )


def test_keypoly_driver_completion_boundary():
    # an extension on top of a ramified level leaves residual terms that
    # only a formal-series parameter absorbs: the run must say so
    from valmono.errors import RequiresCompletionError

    ground = rational_spec([1], names=("u",))
    q1 = MultiPoly.variable(UV, "x")
    q2 = poly(UV, {(0, 2): 1, (7, 0): 1})
    q3 = q2 + poly(UV, {(8, 0): 2})
    chain = KeyPolyChain(
        ground,
        "x",
        (
            (q1, G1.rational(Fraction(7, 2))),
            (q2, G1.rational(8)),
            (q3, G1.rational(11)),
        ),
    )
    assert validate_chain(chain) == []
    with pytest.raises(RequiresCompletionError):
        monomialize_key_polys(chain)


def test_rank_two_uniformizing_sequence():
    # Q = wn - w1 w2 over weights (1, sqrt 2), beta_n = 1 + sqrt 2
    from valmono.polyalg import QQ as base

    g2 = ValueGroup(2)
    prob = UniformizingProblem(
        w_names=("w1", "w2"),
        w_weights=(g2.value([1, 0]), g2.value([0, 1])),
        wn_name="wn",
        beta_n=g2.value([1, 1]),
        residue=ResidueDescriptor(False, ("-1", "1")),
    )
    res = elementary_uniformizing_sequence(prob)
    assert res.abar == 1 and res.alpha_coeffs == (1, 1)
    assert res.witness["exact"] is True
    assert res.frame.tower == base


def test_perturbation_touching_passive_variable():
    h = MultiPoly.build(
        ("w1", "v1", "wn"), {(2, 1, 0): QQ.from_rational(1)}
    )
    prob = UniformizingProblem(
        w_names=("w1",),
        w_weights=(G1.rational(2),),
        wn_name="wn",
        beta_n=G1.rational(3),
        residue=ResidueDescriptor(False, ("-1", "1")),
        v_names=("v1",),
        v_weights=(G1.rational(5),),
        h=h,
    )
    res = elementary_uniformizing_sequence(prob)
    assert res.witness["exact"] is False
    assert res.aux_steps >= 1
    # auxiliary work touched the passive variable: no independence claim
    assert res.sequence.independence_set is None


def test_keypoly_driver_rank_two_ground():
    from valmono.game import MonomialValuationSpec

    g2 = ValueGroup(2)
    spec = MonomialValuationSpec(("u1", "u2"), (g2.value([1, 0]), g2.value([0, 1])))
    vars_ = ("u1", "u2", "x")
    q1 = MultiPoly.variable(vars_, "x")
    q2 = MultiPoly.build(
        vars_, {(0, 0, 2): QQ.from_rational(1), (2, 2, 0): QQ.from_rational(-1)}
    )
    chain = KeyPolyChain(spec, "x", ((q1, g2.value([1, 1])), (q2, g2.value([3, 2]))))
    assert validate_chain(chain) == []
    res = monomialize_key_polys(chain)
    assert res.witnesses[-1].x_multiplicity == 1


def test_beta_outside_span_rejected():
    from valmono.errors import NotInDivisibleHullError

    g2 = ValueGroup(2)
    prob = UniformizingProblem(
        w_names=("w1",),
        w_weights=(g2.value([1, 0]),),
        wn_name="wn",
        beta_n=g2.value([0, 1]),  # sqrt 2, not in Q * 1
        residue=ResidueDescriptor(False, ("-1", "1")),
    )
    with pytest.raises(NotInDivisibleHullError):
        elementary_uniformizing_sequence(prob)

"""Framed steps: matrices, vertices, weights, composition, construction."""

import random
from fractions import Fraction

import pytest

from valmono import _linalg
from valmono.errors import InvalidInputError
from valmono.framing import (
    Frame,
    FramedSequence,
    FramedStep,
    apply_step_to_frame,
    build_constructed_blowup,
    build_step_for_weights,
    choose_vertex,
    compose_sequence,
    make_monomial_blowup,
    make_translation_step,
    pushforward_weights,
)
from valmono.polyalg import MultiPoly, QQ, apply_monomial_map
from valmono.values import ValueGroup


def test_make_monomial_blowup_paper_matrices():
    # n = 2, J = {1,2}, j = 1 (0-based 0): inverse sends u2 -> u2/u1,
    # forward sends u2 -> u1' u2'
    st = make_monomial_blowup(2, (0, 1), 0)
    assert st.inverse.matrix == ((1, -1), (0, 1))
    assert st.forward.matrix == ((1, 1), (0, 1))
    st.check_unimodular()
    assert st.forward.det() == 1


def test_make_monomial_blowup_preconditions():
    with pytest.raises(InvalidInputError):
        make_monomial_blowup(2, (0,), 0)  # |J| < 2
    with pytest.raises(InvalidInputError):
        make_monomial_blowup(3, (0, 1), 2)  # j not in J


def test_make_monomial_blowup_fixed_variable():
    st = make_monomial_blowup(3, (1, 2), 2)
    # u_1 fixed
    assert st.forward.matrix[0] == (1, 0, 0)
    assert tuple(row[0] for row in st.forward.matrix) == (1, 0, 0)
    assert st.forward.det() == 1


def test_choose_vertex():
    g = ValueGroup(2)
    w = [g.value([1, 0]), g.value([0, 1])]
    assert choose_vertex((0, 1), w) == 0  # 1 < sqrt 2
    assert choose_vertex((1,), w) == 1  # singleton
    w_tie = [g.value([1, 0]), g.value([1, 0])]
    assert choose_vertex((0, 1), w_tie) == 0  # tie-break smallest index


def test_pushforward_weights():
    g = ValueGroup(2)
    st = make_monomial_blowup(2, (0, 1), 0)
    w = (g.value([1, 0]), g.value([0, 1]))
    out = pushforward_weights(w, st)
    assert out[0].coords == (Fraction(1), Fraction(0))
    assert out[1].coords == (Fraction(-1), Fraction(1))  # sqrt2 - 1
    # vertex not minimal -> negative weight
    st_bad = make_monomial_blowup(2, (0, 1), 1)
    with pytest.raises(InvalidInputError):
        pushforward_weights(w, st_bad)


def test_pushforward_ties_become_units():
    g = ValueGroup(1)
    w = [g.rational(1), g.rational(1)]
    st = build_step_for_weights(2, (0, 1), 0, w)
    assert st.kind == "translation" and st.J_times == (1,)
    assert st.n_after == 1
    out = pushforward_weights(w, st)
    assert out[1].is_zero()
    frame = apply_step_to_frame(Frame(("a", "b"), tuple(w)), st)
    assert frame.units == frozenset({1})


def test_compose_sequence():
    # empty -> identity
    assert compose_sequence(FramedSequence(()), n=3).is_identity()
    # two inverse-related steps -> identity, via the matrix-product oracle
    s1 = make_monomial_blowup(2, (0, 1), 0)
    s2_forward = s1.inverse
    s2 = FramedStep(
        n_before=2, n_after=2, J=(0, 1), j=0, kind="monomial",
        forward=s2_forward, inverse=s1.forward, D1=(0, 1),
    )
    total = compose_sequence(FramedSequence((s1, s2)))
    assert total.is_identity()
    with pytest.raises(InvalidInputError):
        compose_sequence(
            FramedSequence((make_translation_step(2, 1, ("-1", "1"), None, "b'"),))
        )


def test_compose_independent_block():
    # blow-ups only among variables 1 and 2 leave variable 0 as an
    # identity row and column
    s1 = make_monomial_blowup(3, (1, 2), 1)
    s2 = make_monomial_blowup(3, (1, 2), 2)
    seq = FramedSequence((s1, s2), independence_set=(0,))
    total = compose_sequence(seq)
    assert total.matrix[0] == (1, 0, 0)
    assert tuple(row[0] for row in total.matrix) == (1, 0, 0)
    assert total.det() == 1


def test_sequence_independence_enforced():
    s1 = make_monomial_blowup(3, (0, 1), 0)
    with pytest.raises(InvalidInputError):
        FramedSequence((s1,), independence_set=(0,))


def test_unimodularity_random_sequences():
    rng = random.Random(17)
    for _ in range(50):
        n = rng.randint(2, 5)
        steps = []
        for _ in range(rng.randint(1, 6)):
            size = rng.randint(2, n)
            J = tuple(sorted(rng.sample(range(n), size)))
            j = rng.choice(J)
            steps.append(make_monomial_blowup(n, J, j))
        seq = FramedSequence(tuple(steps))
        total = compose_sequence(seq)
        assert total.det() == 1
        inv = total.inverse()
        assert inv is not None
        assert _linalg.mat_mul(total.matrix, inv.matrix) == _linalg.identity(n)
        for s in steps:
            s.check_unimodular()


def test_monomial_preservation_through_sequences():
    # a monomial stays a monomial through any monomial sequence
    rng = random.Random(23)
    for _ in range(30):
        n = rng.randint(2, 4)
        vars_ = tuple(f"u{i}" for i in range(n))
        seq = []
        for _ in range(rng.randint(1, 5)):
            J = tuple(sorted(rng.sample(range(n), rng.randint(2, n))))
            seq.append(make_monomial_blowup(n, J, rng.choice(J)))
        e = tuple(rng.randint(0, 6) for _ in range(n))
        m = MultiPoly.monomial(vars_, e, 3)
        for s in seq:
            m = apply_monomial_map(m, s.forward)
        assert len(m.terms) == 1


def test_independence_keeps_free_monomials_free():
    # sequence independent of variable 0: images of variable-0-free
    # monomials stay variable-0-free
    rng = random.Random(29)
    n = 4
    vars_ = tuple(f"u{i}" for i in range(n))
    for _ in range(30):
        seq = []
        for _ in range(rng.randint(1, 5)):
            J = tuple(sorted(rng.sample(range(1, n), rng.randint(2, n - 1))))
            seq.append(make_monomial_blowup(n, J, rng.choice(J)))
        e = (0,) + tuple(rng.randint(0, 5) for _ in range(n - 1))
        m = MultiPoly.monomial(vars_, e, 1)
        for s in seq:
            m = apply_monomial_map(m, s.forward)
        (img_e,) = m.terms
        assert img_e[0] == 0


def test_build_constructed_blowup_reduces_to_monomial():
    g = ValueGroup(2)
    w = [g.value([1, 0]), g.value([0, 1])]
    st = build_constructed_blowup(2, (0, 1), 0, w, [])
    assert st.kind == "monomial"
    assert st == make_monomial_blowup(2, (0, 1), 0)


def test_build_constructed_blowup_algebraic():
    # tie with minimal polynomial X - 1: translation u^(1) = u' - 1
    g = ValueGroup(1)
    w = [g.rational(1), g.rational(1)]
    st = build_constructed_blowup(
        2, (0, 1), 0, w, [{"kind": "algebraic", "minpoly": ["-1", "1"], "new_name": "b1"}]
    )
    assert st.kind == "translation"
    assert st.n_after == 2
    item = st.translation_data[0]
    assert item.target == 1 and item.minpoly == ("-1", "1")
    frame = apply_step_to_frame(Frame(("a", "b"), tuple(w)), st)
    assert frame.names == ("a", "b1")
    assert frame.units == frozenset()
    # pushing u_b through: b = b' a ... then b'/... substitution b' = 1 + b1
    from valmono.framing import push_polynomial_through_step

    f = MultiPoly.variable(("a", "b"), "b")
    img = push_polynomial_through_step(f, Frame(("a", "b"), tuple(w)), st)
    # b = a * b' = a * (1 + b1)
    want = MultiPoly.build(
        ("a", "b1"), {(1, 0): QQ.from_rational(1), (1, 1): QQ.from_rational(1)}
    )
    assert MultiPoly(("a", "b1"), img.terms, img.tower) == want


def test_build_constructed_blowup_transcendental_drop():
    g = ValueGroup(1)
    w = [g.rational(1), g.rational(1)]
    st = build_constructed_blowup(2, (0, 1), 0, w, [{"kind": "transcendental"}])
    assert st.n_after == 1
    frame = apply_step_to_frame(Frame(("a", "b"), tuple(w)), st)
    assert frame.units == frozenset({1})


def test_build_constructed_blowup_arity_check():
    g = ValueGroup(1)
    w = [g.rational(1), g.rational(1)]
    with pytest.raises(InvalidInputError):
        build_constructed_blowup(2, (0, 1), 0, w, [{"kind": "transcendental"}] * 2)


def test_step_json_round_trip():
    st = make_monomial_blowup(3, (0, 2), 0)
    assert FramedStep.from_json(st.to_json()) == st
    ts = make_translation_step(2, 1, ("-1", "1"), None, "b'")
    assert FramedStep.from_json(ts.to_json()) == ts
    seq = FramedSequence((st,), independence_set=(1,))
    assert FramedSequence.from_json(seq.to_json()) == seq

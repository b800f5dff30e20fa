"""The monomialization game: tau invariant, descent, pair monomialization,
principalization of monomial ideals, monomial valuations and initial forms.

The driving invariant is tau(alpha, gamma) = (|at|, |gt|) where at, gt are
the exponents after removing the common part (sorted so |at| <= |gt|).
Each blow-up along the greedily chosen center strictly lex-decreases tau,
so every run terminates; tau = (0, .) means one monomial divides the other.

Weight ties make variables of the center acquire weight zero; such
variables are tagged as units, keep their column, and are ignored by all
later divisibility decisions and centers.  For the monomial valuation the
residues of these units are transcendental, so the tagging is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .errors import (
    InvalidInputError,
    NothingToDoError,
    PositiveWeightError,
    StepBudgetExceededError,
    ZeroPolynomialError,
)
from .framing import (
    Frame,
    FramedSequence,
    FramedStep,
    apply_step_to_frame,
    build_step_for_weights,
    choose_vertex,
)
from .polyalg import MultiPoly, apply_monomial_map
from .values import Ordering, Value, compare, value_of_exponent

DEFAULT_BUDGET = 100_000


@dataclass(frozen=True, order=True)
class TauValue:
    """Pair (s, t), s <= t, ordered lexicographically."""

    s: int
    t: int

    def __post_init__(self):
        if self.s > self.t or self.s < 0:
            raise InvalidInputError("tau components must satisfy 0 <= s <= t")

    def divides(self) -> bool:
        return self.s == 0

    def to_json(self) -> list[int]:
        return [self.s, self.t]


@dataclass(frozen=True)
class MonomialValuationSpec:
    """Strictly positive weights on a tuple of variables."""

    vars: tuple[str, ...]
    weights: tuple[Value, ...]

    def __post_init__(self):
        if len(self.vars) != len(self.weights):
            raise InvalidInputError("weight count must equal variable count")
        if len(set(self.vars)) != len(self.vars):
            raise InvalidInputError("variables must be distinct")
        for w in self.weights:
            if not w.is_positive():
                raise PositiveWeightError("weights must be positive")

    def frame(self) -> Frame:
        return Frame(self.vars, self.weights)

    def to_json(self) -> dict:
        return {
            "vars": list(self.vars),
            "weights": [w.to_json() for w in self.weights],
        }


def reduced_parts(
    alpha: Sequence[int], gamma: Sequence[int], units: frozenset[int] = frozenset()
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """(at, gt): exponents after removing the common part, with unit-tagged
    coordinates zeroed out (units are invertible, they never obstruct
    divisibility)."""
    if len(alpha) != len(gamma):
        raise InvalidInputError("exponent vectors must have equal length")
    at, gt = [], []
    for i, (a, g) in enumerate(zip(alpha, gamma)):
        if i in units:
            at.append(0)
            gt.append(0)
        else:
            d = min(a, g)
            at.append(a - d)
            gt.append(g - d)
    return tuple(at), tuple(gt)


def tau(alpha: Sequence[int], gamma: Sequence[int]) -> TauValue:
    at, gt = reduced_parts(alpha, gamma)
    s, t = sorted((sum(at), sum(gt)))
    return TauValue(s, t)


def _greedy_center(
    at: Sequence[int], gt: Sequence[int], weights: Sequence[Value]
) -> tuple[tuple[int, ...], int]:
    """Center for one descent step; ``at`` must be the side of smaller total
    degree.  J is the support of at plus indices of gt (taken in decreasing
    gt_i order, ties by smallest index) until their gt-sum reaches |at|."""
    target = sum(at)
    J = [i for i, a in enumerate(at) if a > 0]
    got = 0
    for i in sorted(
        (i for i, g in enumerate(gt) if g > 0), key=lambda i: (-gt[i], i)
    ):
        if got >= target:
            break
        J.append(i)
        got += gt[i]
    if got < target:
        raise InvalidInputError("gamma side cannot reach |alpha|")
    J = tuple(sorted(J))
    return J, choose_vertex(J, weights)


def descent_center(
    alpha: Sequence[int], gamma: Sequence[int], spec: MonomialValuationSpec
) -> tuple[tuple[int, ...], int]:
    """The center (J, j) of the next descent blow-up for a pair of exponents
    neither of which divides the other."""
    at, gt = reduced_parts(alpha, gamma)
    if sum(at) > sum(gt):
        at, gt = gt, at
    if sum(at) == 0:
        raise NothingToDoError("nothing to do: divisibility already holds")
    return _greedy_center(at, gt, spec.weights)


@dataclass
class PairResult:
    sequence: FramedSequence
    alpha: tuple[int, ...]
    gamma: tuple[int, ...]
    frame: Frame
    records: list[dict]
    alpha_divides: bool
    gamma_divides: bool


class _Budget:
    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    def tick(self) -> None:
        self.used += 1
        if self.used > self.limit:
            raise StepBudgetExceededError(
                f"step budget exceeded ({self.limit} steps)"
            )


def _auto_independence_set(
    alpha: Sequence[int], gamma: Sequence[int], n: int
) -> tuple[int, ...]:
    at, gt = reduced_parts(alpha, gamma)
    return tuple(i for i in range(n) if at[i] == 0 and gt[i] == 0)


def run_pair_descent(
    alpha: Sequence[int],
    gamma: Sequence[int],
    frame: Frame,
    budget: Optional[_Budget] = None,
    records: Optional[list] = None,
    on_step: Optional[Callable[[FramedStep, Frame], None]] = None,
) -> tuple[tuple[int, ...], tuple[int, ...], Frame, list[FramedStep]]:
    """Iterate descent blow-ups until one exponent divides the other
    (units ignored).  Mutates nothing; returns the transformed exponents,
    final frame and the steps taken."""
    alpha = tuple(int(a) for a in alpha)
    gamma = tuple(int(g) for g in gamma)
    if len(alpha) != frame.n or len(gamma) != frame.n:
        raise InvalidInputError("exponent length must match the frame")
    budget = budget or _Budget(DEFAULT_BUDGET)
    steps: list[FramedStep] = []
    at, gt = reduced_parts(alpha, gamma, frame.units)
    prev_tau = None
    bound = sum(at) + sum(gt) + 1
    while True:
        swapped = sum(at) > sum(gt)
        if swapped:
            at, gt = gt, at
        cur_tau = TauValue(sum(at), sum(gt))
        if cur_tau.divides():
            break
        if prev_tau is not None and not (cur_tau < prev_tau):
            raise AssertionError("tau failed to decrease strictly")
        prev_tau = cur_tau
        if len(steps) >= bound:
            raise AssertionError("descent exceeded its a-priori step bound")
        budget.tick()
        J, j = _greedy_center(at, gt, [frame.weights[i] for i in range(frame.n)])
        step = build_step_for_weights(frame.n, J, j, list(frame.weights))
        alpha = step.forward.apply_to_exponent(alpha)
        gamma = step.forward.apply_to_exponent(gamma)
        frame = apply_step_to_frame(frame, step)
        steps.append(step)
        if records is not None:
            rec = {
                "step": len(records) + 1,
                "tau": cur_tau.to_json(),
                "J": [i + 1 for i in J],
                "j": j + 1,
                "alpha": list(alpha),
                "gamma": list(gamma),
            }
            if step.J_times:
                rec["Jx"] = [i + 1 for i in step.J_times]
            records.append(rec)
        if on_step is not None:
            on_step(step, frame)
        at, gt = reduced_parts(alpha, gamma, frame.units)
    return alpha, gamma, frame, steps


def monomialize_pair(
    alpha: Sequence[int],
    gamma: Sequence[int],
    spec: MonomialValuationSpec,
    budget: int = DEFAULT_BUDGET,
    auto_independence: bool = True,
) -> PairResult:
    """Blow up until one of the two monomials divides the other in the
    final frame; returns the transformed exponents."""
    frame = spec.frame()
    records: list[dict] = []
    independence = (
        _auto_independence_set(alpha, gamma, frame.n) if auto_independence else None
    )
    a, g, frame, steps = run_pair_descent(
        alpha, gamma, frame, _Budget(budget), records
    )
    at, gt = reduced_parts(a, g, frame.units)
    return PairResult(
        sequence=FramedSequence(tuple(steps), independence),
        alpha=a,
        gamma=g,
        frame=frame,
        records=records,
        alpha_divides=sum(at) == 0,
        gamma_divides=sum(gt) == 0,
    )


@dataclass
class IdealResult:
    sequence: FramedSequence
    survivor: int
    exponents: list[tuple[int, ...]]
    frame: Frame
    records: list[dict]


def _reduced_divides(
    a: Sequence[int], b: Sequence[int], units: frozenset[int]
) -> bool:
    return all(x <= y for i, (x, y) in enumerate(zip(a, b)) if i not in units)


def _ideal_tau(
    exps: list[tuple[int, ...]], active: list[int], units: frozenset[int]
) -> tuple[int, list[int]]:
    b = len(active) - 1
    if b == 0:
        return 0, [0, 1]
    best = None
    for p in range(len(active)):
        for q in range(p + 1, len(active)):
            at, gt = reduced_parts(exps[active[p]], exps[active[q]], units)
            tv = TauValue(*sorted((sum(at), sum(gt))))
            if best is None or tv < best:
                best = tv
    return b, best.to_json()


def principalize_monomial_ideal(
    generators: Sequence[Sequence[int]],
    spec: MonomialValuationSpec,
    budget: int = DEFAULT_BUDGET,
    auto_independence: bool = True,
) -> IdealResult:
    """Blow up until the monomial ideal is generated by the single image of
    its minimal-value generator.  The tau(I, w) log (generator count, minimal
    pair tau) strictly lex-decreases at every event."""
    exps = [tuple(int(x) for x in g) for g in generators]
    frame = spec.frame()
    independence = None
    if auto_independence:
        touched = {i for e in exps for i in range(frame.n) if e[i] > 0}
        independence = tuple(i for i in range(frame.n) if i not in touched)
    survivor, exps, frame, steps, records = principalize_exponents(
        exps, frame, _Budget(budget)
    )
    return IdealResult(
        sequence=FramedSequence(tuple(steps), independence),
        survivor=survivor,
        exponents=exps,
        frame=frame,
        records=records,
    )


def principalize_exponents(
    generators: Sequence[Sequence[int]],
    frame: Frame,
    budget_: Optional[_Budget] = None,
    records: Optional[list] = None,
    on_step: Optional[Callable[[FramedStep, Frame], None]] = None,
) -> tuple[int, list[tuple[int, ...]], Frame, list[FramedStep], list[dict]]:
    """Core principalization loop on an explicit frame (unit tags allowed)."""
    if not generators:
        raise InvalidInputError("empty generator list")
    exps = [tuple(int(x) for x in g) for g in generators]
    for e in exps:
        if len(e) != frame.n:
            raise InvalidInputError("exponent length must match the frame")
    budget_ = budget_ or _Budget(DEFAULT_BUDGET)
    records = records if records is not None else []
    steps: list[FramedStep] = []
    active = list(range(len(exps)))

    def drop_divisible() -> None:
        changed = True
        while changed and len(active) > 1:
            changed = False
            for p in range(len(active)):
                for q in range(len(active)):
                    if p == q:
                        continue
                    a, b = exps[active[p]], exps[active[q]]
                    if _reduced_divides(a, b, frame.units) and (
                        not _reduced_divides(b, a, frame.units)
                        or active[p] < active[q]
                    ):
                        dropped = active.pop(q)
                        bb, tv = _ideal_tau(exps, active, frame.units)
                        records.append(
                            {
                                "step": len(records) + 1,
                                "event": "drop",
                                "generator": dropped + 1,
                                "tau_ideal": [bb, tv],
                            }
                        )
                        changed = True
                        break
                if changed:
                    break

    drop_divisible()
    while len(active) > 1:
        budget_.tick()
        # the pair attaining the minimal tau drives the next blow-up
        best = None
        for p in range(len(active)):
            for q in range(p + 1, len(active)):
                at, gt = reduced_parts(exps[active[p]], exps[active[q]], frame.units)
                tv = TauValue(*sorted((sum(at), sum(gt))))
                key = (tv, active[p], active[q])
                if best is None or key < best[0]:
                    best = (key, at, gt)
        (tv, _, _), at, gt = best
        if sum(at) > sum(gt):
            at, gt = gt, at
        J, j = _greedy_center(at, gt, list(frame.weights))
        step = build_step_for_weights(frame.n, J, j, list(frame.weights))
        exps = [step.forward.apply_to_exponent(e) for e in exps]
        frame = apply_step_to_frame(frame, step)
        steps.append(step)
        if on_step is not None:
            on_step(step, frame)
        bb, tvj = _ideal_tau(exps, active, frame.units)
        rec = {
            "step": len(records) + 1,
            "event": "blowup",
            "tau_ideal": [bb, tvj],
            "J": [i + 1 for i in J],
            "j": j + 1,
            "exponents": [list(exps[i]) for i in active],
        }
        if step.J_times:
            rec["Jx"] = [i + 1 for i in step.J_times]
        records.append(rec)
        drop_divisible()

    survivor = active[0]
    for k, e in enumerate(exps):
        if not _reduced_divides(exps[survivor], e, frame.units):
            raise AssertionError(
                f"survivor does not divide generator {k} after principalization"
            )
    return survivor, exps, frame, steps, records


def monomial_valuation(f: MultiPoly, spec: MonomialValuationSpec) -> Value:
    """min over terms of the weighted exponent value."""
    if f.is_zero():
        raise ZeroPolynomialError("zero polynomial has no value")
    if f.vars != spec.vars:
        raise InvalidInputError("polynomial variables must match the spec")
    best = None
    for e in f.terms:
        v = value_of_exponent(e, spec.weights)
        if best is None or compare(v, best) is Ordering.Less:
            best = v
    return best


def initial_form(f: MultiPoly, spec: MonomialValuationSpec) -> MultiPoly:
    """Sum of the terms of minimal value; homogeneous for the weighting."""
    v0 = monomial_valuation(f, spec)
    keep = {
        e: c
        for e, c in f.terms.items()
        if compare(value_of_exponent(e, spec.weights), v0) is Ordering.Equal
    }
    return MultiPoly(f.vars, keep, f.tower)


@dataclass
class NondegResult:
    sequence: FramedSequence
    exponent: tuple[int, ...]
    unit_witness: MultiPoly
    frame: Frame
    records: list[dict]
    image: MultiPoly


def _antichain(exps: list[tuple[int, ...]]) -> list[tuple[int, ...]]:
    keep = []
    for e in exps:
        if any(all(x <= y for x, y in zip(o, e)) and o != e for o in exps):
            continue
        keep.append(e)
    return keep


def monomialize_nondegenerate(
    f: MultiPoly,
    spec: MonomialValuationSpec,
    budget: int = DEFAULT_BUDGET,
    auto_independence: bool = True,
) -> NondegResult:
    """Principalize the ideal of exponents of f; in the final frame
    f = w^exponent * unit, the unit having invertible constant part."""
    if f.is_zero():
        raise ZeroPolynomialError("zero polynomial has no value")
    if f.vars != spec.vars:
        raise InvalidInputError("polynomial variables must match the spec")
    exps = sorted(f.terms.keys(), key=lambda e: (sum(e), e))
    gens = _antichain(exps)
    res = principalize_monomial_ideal(gens, spec, budget, auto_independence)
    # use the minimal-value generator image as the monomial part
    frame = res.frame
    image = f
    for step in res.sequence.steps:
        image = apply_monomial_map(image, step.forward)
    # survivor's image, units zeroed out
    surv = res.exponents[res.survivor]
    monomial = tuple(
        0 if i in frame.units else x for i, x in enumerate(surv)
    )
    shifted = {}
    for e, c in image.terms.items():
        ne = tuple(x - m for x, m in zip(e, monomial))
        if any(x < 0 for x in ne):
            raise AssertionError("survivor fails to divide a term of the image")
        shifted[ne] = c
    witness = MultiPoly(image.vars, shifted, image.tower)
    has_unit_term = any(
        all(x == 0 for i, x in enumerate(e) if i not in frame.units)
        for e in witness.terms
    )
    if not has_unit_term:
        raise AssertionError("unit witness has no invertible part")
    return NondegResult(
        sequence=res.sequence,
        exponent=monomial,
        unit_witness=witness,
        frame=frame,
        records=res.records,
        image=image,
    )

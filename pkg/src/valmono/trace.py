"""Replayable JSON traces: run records, witnesses, and independent
re-verification.

A trace embeds its input verbatim; verification replays the run through
the library and demands that every recorded step and witness reproduce
bit-exactly.  The header timestamp is advisory and excluded from digests,
so identical inputs yield identical traces up to that field.
"""

from __future__ import annotations

import hashlib
import json
from datetime import datetime, timezone
from typing import Callable, Optional

from .errors import (
    SchemaError,
    TraceMismatchError,
    ValmonoError,
)
from .game import (
    DEFAULT_BUDGET,
    MonomialValuationSpec,
    monomialize_nondegenerate,
    monomialize_pair,
    principalize_monomial_ideal,
)
from .keypoly import (
    chain_from_json,
    delta_invariant,
    epsilon_invariant,
    standard_expansion,
    truncated_valuation,
)
from .polyalg import MultiPoly, QQ
from .unifseq import (
    ResidueDescriptor,
    UniformizingProblem,
    elementary_uniformizing_sequence,
    monomialize_key_polys,
    monomialize_polynomial,
)
from .values import Value, ValueGroup

TOOL = "valmono"
VERSION = "0.1.0"
SCHEMA = 1

ALGORITHMS = (
    "pair",
    "principalize",
    "nondegenerate",
    "keypoly-expand",
    "keypoly-monomialize",
    "uniformize",
    "polynomial",
)


def canonical_digest(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return "sha256:" + hashlib.sha256(blob).hexdigest()


def _need(obj: dict, key: str):
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(f"missing field {key!r}")
    return obj[key]


def _parse_group(obj: dict) -> ValueGroup:
    try:
        return ValueGroup.from_json(_need(obj, "group"))
    except ValmonoError:
        raise
    except Exception as exc:
        raise SchemaError(f"bad group: {exc}") from None


def _parse_spec(obj: dict, group: ValueGroup) -> MonomialValuationSpec:
    spec = _need(obj, "spec")
    vars_ = tuple(_need(spec, "vars"))
    weights = tuple(Value.from_json(w, group) for w in _need(spec, "weights"))
    return MonomialValuationSpec(vars_, weights)


def _parse_exponents(obj) -> list[tuple[int, ...]]:
    if not isinstance(obj, list):
        raise SchemaError("exponents must be arrays")
    out = []
    for e in obj:
        if not isinstance(e, list) or not all(
            isinstance(x, int) and not isinstance(x, bool) and x >= 0 for x in e
        ):
            raise SchemaError("exponents must be arrays of nonnegative integers")
        out.append(tuple(e))
    return out


def _sequence_file(seq, frame0, group) -> dict:
    """Sequence-file schema: step records plus a header carrying the
    initial variable labels and weights."""
    out = {"header": dict(frame0.to_json(), group=group.to_json())}
    out.update(seq.to_json())
    return out


# ---------------------------------------------------------------------------
# runners: input json -> witnesses dict (records land in trace["steps"])
# ---------------------------------------------------------------------------


def _run_pair(inp: dict, budget: int, auto_ind: bool) -> tuple[list, dict]:
    group = _parse_group(inp)
    spec = _parse_spec(inp, group)
    alpha = _parse_exponents([_need(inp, "alpha")])[0]
    gamma = _parse_exponents([_need(inp, "gamma")])[0]
    res = monomialize_pair(alpha, gamma, spec, budget, auto_ind)
    witnesses = {
        "alpha_final": list(res.alpha),
        "gamma_final": list(res.gamma),
        "alpha_divides": res.alpha_divides,
        "gamma_divides": res.gamma_divides,
        "divides": res.alpha_divides or res.gamma_divides,
        "sequence": _sequence_file(res.sequence, spec.frame(), group),
        "final_frame": res.frame.to_json(),
    }
    return res.records, witnesses


def _run_principalize(inp: dict, budget: int, auto_ind: bool) -> tuple[list, dict]:
    group = _parse_group(inp)
    spec = _parse_spec(inp, group)
    gens = _parse_exponents(_need(inp, "generators"))
    res = principalize_monomial_ideal(gens, spec, budget, auto_ind)
    witnesses = {
        "survivor": res.survivor,
        "exponents_final": [list(e) for e in res.exponents],
        "sequence": _sequence_file(res.sequence, spec.frame(), group),
        "final_frame": res.frame.to_json(),
    }
    return res.records, witnesses


def _run_nondegenerate(inp: dict, budget: int, auto_ind: bool) -> tuple[list, dict]:
    group = _parse_group(inp)
    spec = _parse_spec(inp, group)
    poly = MultiPoly.from_json(_need(inp, "poly"), QQ).with_vars(spec.vars)
    res = monomialize_nondegenerate(poly, spec, budget, auto_ind)
    witnesses = {
        "exponent": list(res.exponent),
        "unit_witness": res.unit_witness.to_json(),
        "image": res.image.to_json(),
        "sequence": _sequence_file(res.sequence, spec.frame(), group),
        "final_frame": res.frame.to_json(),
    }
    return res.records, witnesses


def _run_keypoly_expand(inp: dict, budget: int, auto_ind: bool) -> tuple[list, dict]:
    group = _parse_group(inp)
    chain = chain_from_json(_need(inp, "chain"), group)
    poly = MultiPoly.from_json(_need(inp, "poly"), QQ).with_vars(chain.all_vars)
    level = int(inp.get("level", len(chain)))
    exp = standard_expansion(poly, chain, level)
    value = truncated_valuation(poly, chain, level)
    delta = delta_invariant(poly, chain, level)
    eps = epsilon_invariant(poly, chain, level)
    witnesses = {
        "level": level,
        "coefficients": [c.to_json() for c in exp.coefficients],
        "reassembles": exp.reassemble() == poly,
        "truncated_value": value.to_json(),
        "delta": delta,
        "epsilon": eps,
    }
    return [], witnesses


def _chain_frame(chain):
    from .framing import Frame

    return Frame(
        chain.all_vars, chain.ground.weights + (chain.beta(1),), frozenset(), QQ
    )


def _run_keypoly_monomialize(inp: dict, budget: int, auto_ind: bool) -> tuple[list, dict]:
    group = _parse_group(inp)
    chain = chain_from_json(_need(inp, "chain"), group)
    res = monomialize_key_polys(chain, budget, auto_ind)
    witnesses = {
        "final_frame": res.frame.to_json(),
        "x_column": res.x_column + 1,
        "level_data": res.level_data,
        "entries": [
            {
                "entry": w.entry,
                "monomial": list(w.monomial),
                "unit": w.unit.to_json(),
                "x_multiplicity": w.x_multiplicity,
            }
            for w in res.witnesses
        ],
        "sequence": _sequence_file(res.sequence, _chain_frame(chain), group),
    }
    return res.records, witnesses


def _parse_uniformize_problem(inp: dict) -> UniformizingProblem:
    group = _parse_group(inp)
    prob = _need(inp, "problem")
    w_names = tuple(_need(prob, "w_vars"))
    w_weights = tuple(Value.from_json(w, group) for w in _need(prob, "w_weights"))
    wn = _need(prob, "wn_var")
    beta_n = Value.from_json(_need(prob, "beta_n"), group)
    residue = ResidueDescriptor.from_json(_need(prob, "residue"))
    v_names = tuple(prob.get("v_vars", ()))
    v_weights = tuple(
        Value.from_json(w, group) if w is not None else None
        for w in prob.get("v_weights", [None] * len(v_names))
    )
    h = None
    if prob.get("h") is not None:
        h = MultiPoly.from_json(prob["h"], QQ)
    beta_new = (
        Value.from_json(prob["beta_new"], group)
        if prob.get("beta_new") is not None
        else None
    )
    return UniformizingProblem(
        w_names=w_names,
        w_weights=w_weights,
        wn_name=wn,
        beta_n=beta_n,
        residue=residue,
        v_names=v_names,
        v_weights=v_weights,
        h=h,
        beta_new=beta_new,
    )


def _run_uniformize(inp: dict, budget: int, auto_ind: bool) -> tuple[list, dict]:
    problem = _parse_uniformize_problem(inp)
    res = elementary_uniformizing_sequence(problem, budget, auto_ind)
    witnesses = {
        "abar": res.abar,
        "alpha": list(res.alpha_coeffs),
        "d": res.d,
        "z_column": (res.z_column + 1) if res.z_column is not None else None,
        "z_sign": res.z_sign,
        "new_var": res.new_var,
        "residue": res.residue.to_json(),
        "images": res.images,
        "factorization": res.witness,
        "final_frame": res.frame.to_json(),
        "sequence": _sequence_file(res.sequence, problem.frame(), _parse_group(inp)),
        "aux_steps": res.aux_steps,
    }
    return res.records, witnesses


def _run_polynomial(inp: dict, budget: int, auto_ind: bool) -> tuple[list, dict]:
    group = _parse_group(inp)
    chain = chain_from_json(_need(inp, "chain"), group)
    poly = MultiPoly.from_json(_need(inp, "poly"), QQ).with_vars(chain.all_vars)
    res = monomialize_polynomial(poly, chain, budget, auto_ind)
    witnesses = {
        "exponent": list(res.exponent),
        "unit_witness": res.unit_witness.to_json(),
        "image": res.image.to_json(),
        "expansion_values": res.expansion_values,
        "final_frame": res.frame.to_json(),
        "sequence": _sequence_file(res.sequence, _chain_frame(chain), group),
    }
    return res.records, witnesses


_RUNNERS: dict[str, Callable] = {
    "pair": _run_pair,
    "principalize": _run_principalize,
    "nondegenerate": _run_nondegenerate,
    "keypoly-expand": _run_keypoly_expand,
    "keypoly-monomialize": _run_keypoly_monomialize,
    "uniformize": _run_uniformize,
    "polynomial": _run_polynomial,
}


def run_problem(
    inp: dict,
    budget: int = DEFAULT_BUDGET,
    auto_independence: bool = True,
    command: str = "run",
) -> dict:
    """Execute one problem object and wrap the outcome in a trace."""
    if not isinstance(inp, dict):
        raise SchemaError("problem must be a JSON object")
    algorithm = _need(inp, "algorithm")
    if algorithm not in _RUNNERS:
        raise SchemaError(f"unknown algorithm selector {algorithm!r}")
    header = {
        "tool": TOOL,
        "version": VERSION,
        "schema": SCHEMA,
        "command": command,
        "algorithm": algorithm,
        "budget": budget,
        "auto_independence": auto_independence,
        "input_digest": canonical_digest(inp),
        "created": datetime.now(timezone.utc).isoformat(),
    }
    trace = {"header": header, "input": inp, "steps": [], "witnesses": None}
    try:
        records, witnesses = _RUNNERS[algorithm](inp, budget, auto_independence)
        trace["steps"] = records
        trace["witnesses"] = witnesses
        trace["verdict"] = {"ok": True}
    except SchemaError:
        raise
    except ValmonoError as exc:
        trace["verdict"] = {"ok": False, "code": exc.code, "message": str(exc)}
    return trace


def verify_trace(trace: dict) -> None:
    """Replay the embedded input and compare every recorded step and
    witness; raises TraceMismatchError on the first divergence."""
    if not isinstance(trace, dict):
        raise SchemaError("trace must be a JSON object")
    header = _need(trace, "header")
    inp = _need(trace, "input")
    budget = header.get("budget", DEFAULT_BUDGET)
    auto_ind = header.get("auto_independence", True)
    fresh = run_problem(inp, budget, auto_ind, command="verify")
    old_steps = trace.get("steps") or []
    new_steps = fresh.get("steps") or []
    for k in range(max(len(old_steps), len(new_steps))):
        a = old_steps[k] if k < len(old_steps) else None
        b = new_steps[k] if k < len(new_steps) else None
        if a != b:
            raise TraceMismatchError(k + 1)
    if trace.get("witnesses") != fresh.get("witnesses"):
        raise TraceMismatchError(len(old_steps) + 1, "trace mismatch at witnesses")
    old_verdict = trace.get("verdict") or {}
    new_verdict = fresh.get("verdict") or {}
    if old_verdict.get("ok") != new_verdict.get("ok") or old_verdict.get(
        "code"
    ) != new_verdict.get("code"):
        raise TraceMismatchError(len(old_steps) + 1, "trace mismatch at verdict")

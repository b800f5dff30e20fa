"""Exact-arithmetic framed blow-up sequences, key-polynomial chains and
monomialization, with replayable JSON traces."""

from .values import Ordering, Value, ValueGroup, compare, min_integer_multiple_in_lattice, value_of_exponent
from .polyalg import (
    FieldTower,
    LaurentMonomialMap,
    MultiPoly,
    QQ,
    apply_monomial_map,
    euclid_divide,
    q_adic_expansion,
    substitute_variable,
)
from .framing import (
    Frame,
    FramedSequence,
    FramedStep,
    build_constructed_blowup,
    choose_vertex,
    compose_sequence,
    make_monomial_blowup,
    pushforward_weights,
)
from .game import (
    MonomialValuationSpec,
    TauValue,
    descent_center,
    initial_form,
    monomial_valuation,
    monomialize_nondegenerate,
    monomialize_pair,
    principalize_monomial_ideal,
    tau,
)
from .keypoly import (
    KeyPolyChain,
    StandardExpansion,
    delta_invariant,
    epsilon_invariant,
    next_key_char0,
    standard_expansion,
    truncated_valuation,
    validate_chain,
)
from .unifseq import (
    ResidueDescriptor,
    UniformizingProblem,
    UniformizingResult,
    elementary_uniformizing_sequence,
    monomialize_key_polys,
    monomialize_polynomial,
)

__version__ = "0.1.0"

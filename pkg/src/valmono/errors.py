"""Exception hierarchy shared by every module.

Each error carries a short machine-readable ``code`` used in traces and by
the CLI exit-code contract.
"""

from __future__ import annotations


class ValmonoError(Exception):
    """Base class; ``code`` is stable across versions, the message is not."""

    code = "error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)


class GroupMismatchError(ValmonoError):
    code = "group mismatch"


class NotInDivisibleHullError(ValmonoError):
    code = "not in divisible hull"


class DegenerateBasisError(ValmonoError):
    code = "degenerate basis"


class NonMonicDivisorError(ValmonoError):
    code = "non-monic divisor"


class LaurentEscapeError(ValmonoError):
    code = "Laurent escape"


class ReducibleDefinerError(ValmonoError):
    """Raised lazily when tower arithmetic uncovers a reducible definer."""

    code = "reducible definer"

    def __init__(self, message: str = "", factor=None):
        super().__init__(message)
        self.factor = factor


class ZeroPolynomialError(ValmonoError):
    code = "zero polynomial has no value"


class NothingToDoError(ValmonoError):
    code = "nothing to do"


class PositiveWeightError(ValmonoError):
    code = "weights must be positive"


class UnnormalizedLeadingCoefficientError(ValmonoError):
    code = "unnormalized leading coefficient"


class StepBudgetExceededError(ValmonoError):
    code = "step budget exceeded"


class RequiresCompletionError(ValmonoError):
    """The run reached a state that needs formal-series units."""

    code = "requires completion"

    def __init__(self, message: str = "", partial_trace=None):
        super().__init__(message)
        self.partial_trace = partial_trace


class InvalidInputError(ValmonoError):
    """Structurally valid JSON whose content violates an operation's
    precondition (bad subsets, dependent bases, invalid chains, ...)."""

    code = "invalid input"


class SchemaError(ValmonoError):
    """Malformed input file: not JSON, missing fields, wrong types."""

    code = "schema error"


class TraceMismatchError(ValmonoError):
    code = "trace mismatch"

    def __init__(self, step: int, message: str = ""):
        super().__init__(message or f"trace mismatch at step {step}")
        self.step = step

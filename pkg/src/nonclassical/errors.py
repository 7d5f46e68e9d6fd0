"""Exception types shared across the package.

Every error carries a short machine-readable ``code`` so the CLI can map
failures onto exit codes without string matching.
"""


class NonclassicalError(Exception):
    """Base class. ``code`` names the failure kind."""

    code = "error"


class PreconditionError(NonclassicalError, ValueError):
    code = "precondition"


class InvalidArgumentError(PreconditionError):
    code = "invalid-argument"


class OutOfRangeError(PreconditionError, IndexError):
    code = "out-of-range"


class DimensionMismatchError(PreconditionError):
    code = "dimension-mismatch"


class TruncationTooSmallError(PreconditionError):
    """Requested state does not fit in the chosen truncation."""

    code = "truncation-too-small"

    def __init__(self, message, required_dim=None):
        super().__init__(message)
        self.required_dim = required_dim


class TruncationContaminatedError(PreconditionError):
    """State has weight on levels where the truncated ladder is wrong."""

    code = "truncation-contaminated"


class UndefinedForVacuumError(PreconditionError):
    code = "undefined-for-vacuum"


class NonUniqueSteadyStateError(PreconditionError):
    code = "non-unique-steady-state"


class NormalizationUndefinedError(PreconditionError):
    code = "normalization-undefined"


class StepCountOverflowError(PreconditionError):
    code = "step-count-overflow"


class ConvergenceError(PreconditionError):
    code = "non-convergence"


class SpecParseError(NonclassicalError, ValueError):
    """Malformed or unknown input spec (state, model or moment file)."""

    code = "parse-error"

    def __init__(self, message, fields=None):
        super().__init__(message)
        self.fields = dict(fields or {})


class UnknownKindError(SpecParseError):
    code = "unknown-kind"

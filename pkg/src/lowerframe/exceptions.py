"""Exception hierarchy.

Every error raised by the pipeline derives from :class:`LowerFrameError`.
``run_pipeline`` fills in :attr:`LowerFrameError.stage` before re-raising so
callers can tell which step failed.
"""


class LowerFrameError(Exception):
    """Base class for all package errors."""

    stage = None

    def __str__(self):
        msg = super().__str__()
        if self.stage:
            return f"[{self.stage}] {msg}"
        return msg


class InputError(LowerFrameError, ValueError):
    """Malformed or inconsistent user input."""


class FamilyFormatError(InputError):
    """A family file could not be parsed; ``context`` locates the problem."""

    def __init__(self, message, context=None):
        self.context = context
        if context:
            message = f"{context}: {message}"
        super().__init__(message)


class GenerationError(LowerFrameError):
    """A built-in generator produced a family that is not total."""


class TotalityError(LowerFrameError):
    """The family does not span the ambient space."""

    def __init__(self, rank, dim):
        self.rank = rank
        self.dim = dim
        super().__init__(f"family is not total: numerical rank {rank} < dimension {dim}")


class InconsistencyError(LowerFrameError):
    """A subspace computation violated a structural invariant."""


class ApproximationError(LowerFrameError):
    """An approximant could not reach its residual budget."""

    def __init__(self, n, residual, bound):
        self.n = n
        self.residual = residual
        self.bound = bound
        super().__init__(
            f"approximant z_{n}: residual {residual:.3e} is not below {bound:.3e}"
        )


class InvertibilityError(LowerFrameError):
    """The perturbation has operator norm >= 1, so I - T may be singular."""


class WeightOverflowError(LowerFrameError):
    """A scaling weight overflowed binary64; ``log2`` holds the exact exponent."""

    def __init__(self, k, log2):
        self.k = k
        self.log2 = log2
        super().__init__(
            f"weight lambda_{k} overflows binary64 (log2 = {log2:.3f}); "
            "report log2 values instead or use a shorter family"
        )


class DegenerateError(LowerFrameError):
    """The unweighted frame operator is (numerically) singular."""

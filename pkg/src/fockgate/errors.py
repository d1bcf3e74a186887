"""Exception hierarchy shared by all fockgate modules."""


class FockgateError(Exception):
    """Base class for every error raised by this package."""


class OverflowBeyondCap(FockgateError, OverflowError):
    pass


class DimensionCapExceeded(FockgateError):
    def __init__(self, dim, cap):
        super().__init__(f"Hilbert space dimension M={dim} exceeds the configured cap {cap}")
        self.dim = dim
        self.cap = cap


class ModeOutOfRange(FockgateError, IndexError):
    pass


class DimensionMismatch(FockgateError, ValueError):
    pass


class InvalidState(FockgateError, ValueError):
    """A state or density matrix violates its defining invariants."""


class RankDeficient(FockgateError, ArithmeticError):
    pass


class CompletionCountMismatch(FockgateError, ArithmeticError):
    pass


class FrameMismatch(FockgateError, ValueError):
    pass


class FrameCacheError(FockgateError, ValueError):
    """A serialized frame file is corrupt or belongs to a different (m, n)."""


class NotUnitary(FockgateError, ValueError):
    pass


class LogBranchFailure(FockgateError, ArithmeticError):
    pass


class PhotonNumberMismatch(FockgateError, ValueError):
    pass


class DomainError(FockgateError, ValueError):
    pass


class ShapeMismatch(FockgateError, ValueError):
    pass


class ExactUnavailable(FockgateError, TypeError):
    """The state carries no exact amplitudes."""


class StateParseError(FockgateError, ValueError):
    """Base for all state-expression errors; ``offset`` is a byte offset into the input."""

    def __init__(self, message, offset=None):
        where = f" at byte {offset}" if offset is not None else ""
        super().__init__(f"{message}{where}")
        self.offset = offset


class StateSyntaxError(StateParseError):
    def __init__(self, message, offset, expected=()):
        self.expected = frozenset(expected)
        if self.expected:
            message = f"{message}; expected one of {sorted(self.expected)}"
        super().__init__(message, offset)


class MixedPhotonNumber(StateParseError):
    def __init__(self, first, second, offset=None):
        super().__init__(
            f"kets {_fmt_ket(first)} and {_fmt_ket(second)} differ in mode count or photon number",
            offset,
        )
        self.kets = (tuple(first), tuple(second))


class EmptyExpression(StateParseError):
    pass


class ProbabilitySumError(StateParseError):
    pass


class MixtureParseError(StateParseError):
    def __init__(self, index, cause):
        super().__init__(f"mixture component {index}: {cause}", getattr(cause, "offset", None))
        self.index = index
        self.cause = cause


def _fmt_ket(ket):
    return "|" + ",".join(str(k) for k in ket) + ">"

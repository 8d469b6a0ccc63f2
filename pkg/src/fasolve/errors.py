"""Exception hierarchy shared by all fasolve modules."""

from __future__ import annotations


class FasolveError(Exception):
    """Base class for every error raised by fasolve."""


class GradeRangeError(FasolveError, ValueError):
    pass


class UnboundAnnotationVariable(FasolveError):
    pass


class ArityMismatch(FasolveError):
    pass


class ParseFailure(FasolveError):
    """Raised by the parser; carries every ParseError found in the input."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(str(e) for e in self.errors))


class UnsafeRule(FasolveError):
    pass


class UngroundGuard(FasolveError):
    pass


class GuardTypeMismatch(FasolveError):
    pass


class FunctionDepthError(FasolveError):
    pass


class CapOverflow(FasolveError):
    """A configured search-space cap was exceeded."""

    def __init__(self, message, size=None):
        self.size = size
        super().__init__(message)


class LatticeOverflow(CapOverflow):
    pass


class CandidateSpaceOverflow(CapOverflow):
    pass


class OracleSpaceOverflow(CapOverflow):
    pass


class NonBooleanGrade(FasolveError):
    pass

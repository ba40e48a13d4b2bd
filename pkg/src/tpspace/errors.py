"""Exception hierarchy."""


class TPSError(Exception):
    """Base class for all errors raised by tpspace."""


class StructuralError(TPSError, ValueError):
    """Inputs are inconsistent with the sector table (wrong sector, wrong dimension)."""


class EmptyKernelError(TPSError, ValueError):
    """A kernel was requested from a space without points."""


class PreconditionError(TPSError, ValueError):
    """An operation was called outside its domain."""


class DegenerateProjectionError(PreconditionError):
    """A ray was projected onto a subspace it is orthogonal to."""


class ReducibleBlockError(PreconditionError):
    """A kernel block splits into several sectors and must be split first."""


class ChartError(TPSError, ValueError):
    """The pivot component of a chart vanishes; use ``suggested_pivot`` instead."""

    def __init__(self, message, suggested_pivot):
        super().__init__(message)
        self.suggested_pivot = suggested_pivot


class IntegrationError(TPSError, RuntimeError):
    """Numerical integration could not proceed even after changing charts."""


class InputError(TPSError, ValueError):
    """A JSON document is malformed or does not match its schema."""

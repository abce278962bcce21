"""Exception hierarchy shared by the library and the CLI exit-code mapping."""


class IFOutageError(Exception):
    """Base class for all library errors."""


class DomainError(IFOutageError, ValueError):
    """Inputs outside the region where an operation is defined."""


class NumericalError(IFOutageError, ArithmeticError):
    """A numerical procedure failed (singular matrix, failed Cholesky, ...)."""


class EnumerationCapError(IFOutageError, RuntimeError):
    """An integer-vector enumeration would exceed its configured size cap."""

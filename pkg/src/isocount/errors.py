"""Error types shared by every module.

Each class maps to one CLI exit status: usage problems exit with 2,
capability limits with 3 and failed internal assertions with 4.
"""


class IsocountError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class UsageError(IsocountError, ValueError):
    """Bad arguments: mixed moduli, size mismatches, out-of-range parameters."""

    exit_code = 2


class DomainError(IsocountError, ArithmeticError):
    """Mathematically undefined operation, such as inverting zero."""

    exit_code = 2


class CapabilityError(IsocountError):
    """The request exceeds a documented size or feature bound."""

    exit_code = 3


class InternalAssertionError(IsocountError, AssertionError):
    """A promised invariant failed at run time (for example a non-integral count)."""

    exit_code = 4

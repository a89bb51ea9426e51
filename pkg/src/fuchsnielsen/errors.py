"""Exception types shared across the package."""


class FuchsNielsenError(Exception):
    """Base class for all package errors."""


class PreconditionViolated(FuchsNielsenError, ValueError):
    pass


class ModulusMismatch(FuchsNielsenError, ValueError):
    pass


class InvalidExponent(FuchsNielsenError, ValueError):
    pass


class MalformedRecord(FuchsNielsenError, ValueError):
    pass


class NotInvertible(FuchsNielsenError, ValueError):
    pass


class IncompatibleSystems(FuchsNielsenError, ValueError):
    pass


class NotEquivalent(FuchsNielsenError, ValueError):
    pass


class NumericFailure(FuchsNielsenError, RuntimeError):
    pass


class BuildFailed(FuchsNielsenError, RuntimeError):
    pass


class DegenerateDiagonalization(FuchsNielsenError, ValueError):
    pass


class NoSharedDivisor(FuchsNielsenError, ValueError):
    pass


class UnknownGenerator(FuchsNielsenError, KeyError):
    pass


class CheckFailed(FuchsNielsenError, AssertionError):
    pass

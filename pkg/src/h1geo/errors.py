"""Exception hierarchy shared by every module."""


class H1GeoError(Exception):
    """Base class for all package errors."""


class NonHorizontal(H1GeoError, ValueError):
    pass


class DomainError(H1GeoError, ValueError):
    pass


class EvaluationError(H1GeoError):
    pass


class GeometricPreconditionError(H1GeoError):
    """A point or curve violates a geometric hypothesis (exit code 4 in the CLI)."""

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class CharacteristicPoint(GeometricPreconditionError):
    pass


class DegenerateImmersion(GeometricPreconditionError):
    pass


class NonTransverse(GeometricPreconditionError):
    pass


class NonTransverseBoundary(NonTransverse):
    pass


class InconsistentFrame(GeometricPreconditionError):
    pass


class NonConvergence(H1GeoError):
    pass


class ConstructionError(H1GeoError):
    """Raised when a catalog object cannot be built (exit code 3 in the CLI)."""


class UnknownEntry(ConstructionError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class BadParams(ConstructionError, ValueError):
    pass


class NotClosed(ConstructionError, ValueError):
    pass


class DivisionByZero(H1GeoError, ZeroDivisionError):
    pass

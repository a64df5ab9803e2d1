"""Exception hierarchy.

Input problems derive from :class:`InputError` (also a ``ValueError``) so the
command layer can map them to exit code 2; :class:`InvariantViolation` marks a
failed internal certificate and maps to exit code 1.
"""


class JacobelError(Exception):
    pass


class InputError(JacobelError, ValueError):
    pass


class DisconnectedCurve(InputError):
    pass


class DuplicateName(InputError):
    pass


class DanglingNodeEnd(InputError):
    pass


class UnknownNode(InputError):
    pass


class UnknownComponent(InputError):
    pass


class OverlappingSubcurves(InputError):
    pass


class ImproperSubcurve(InputError):
    pass


class NotReducibleNode(InputError):
    pass


class NotAdjacent(InputError):
    pass


class DegreeMismatch(InputError):
    pass


class NotAdmissible(InputError):
    pass


class SearchTooLarge(JacobelError):
    pass


class NoQuasistableTwister(JacobelError):
    pass


class InvariantViolation(JacobelError):
    """A computed object failed one of the certified properties.

    ``witness`` carries whatever makes the failure re-checkable by hand
    (usually a subcurve and its beta value).
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness

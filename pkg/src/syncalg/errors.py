"""Exception types shared across the package."""


class SyncAlgError(Exception):
    """Base class for all errors raised by this package."""


class SpaceMismatchError(SyncAlgError):
    """Operands were built over different state spaces."""


class ParseError(SyncAlgError):
    """Command text does not conform to the DSL grammar.

    Carries the offset of the offending token in ``position``.
    """

    def __init__(self, message, position):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class UnknownStateError(SyncAlgError):
    """A state name in a literal is not a member of the space."""


class ExponentCapError(SyncAlgError):
    """A fixed-iteration exponent exceeded the configured unfold bound."""


class UnguardedIterationError(SyncAlgError):
    """An om/inf body can terminate without taking a step.

    Only raised by the automaton backend; the bounded backend accepts
    such terms.
    """


class StateExplosionError(SyncAlgError):
    """The residual configuration graph exceeded the configured cap."""

    def __init__(self, cap):
        super().__init__(f"state explosion: residual cap of {cap} configs exceeded")
        self.cap = cap

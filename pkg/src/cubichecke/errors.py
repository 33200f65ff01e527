"""Shared exception types."""


class CubicHeckeError(Exception):
    """Base class for all library errors."""


class NotReducedError(CubicHeckeError):
    """A word expected in block form is not reduced."""


class BadRangeError(CubicHeckeError):
    """Index arguments outside their admissible range."""


class RingMismatchError(CubicHeckeError):
    """Operands built over different coefficient rings."""


class IncompatibleError(CubicHeckeError):
    """Gröbner objects with mismatched rank, ring or ordering."""


class NotInDomainError(CubicHeckeError):
    """A Markov reduction applied outside its domain."""


class BasisEscapeError(CubicHeckeError):
    """A reduced word fell outside the expected finite basis."""


class IterationCapError(CubicHeckeError):
    """A saturation loop hit its round cap before stabilizing."""

    def __init__(self, message, checkpoint=None):
        super().__init__(message)
        self.checkpoint = checkpoint


class NotFiniteError(CubicHeckeError):
    """The quotient ring is not a finite set."""


class BraidSyntaxError(CubicHeckeError):
    """Malformed braid text."""


class IndexOutOfRangeError(CubicHeckeError):
    """Braid letter index outside the strand bound."""

"""Exception types raised across the package.

Every error raised on purpose derives from :class:`BiorthoError`, so callers
can catch one base class.  The split below mirrors how the command line tool
maps failures to exit codes: numerical failures versus bad input.
"""


class BiorthoError(Exception):
    """Base class for all errors raised by this package."""


class GridMismatch(BiorthoError):
    """Two signals or containers live on different sampling grids."""


class ParseError(BiorthoError):
    """A CSV or option string could not be parsed."""


class DegenerateAtom(BiorthoError):
    """An atom has (numerically) zero norm and cannot be normalized."""


class UnknownAtom(BiorthoError):
    """An atom id is not active in the container it was looked up in."""


class LastAtom(BiorthoError):
    """Removal was requested but only one atom remains."""


class LinearlyDependent(BiorthoError):
    """A new atom lies in the span of the active ones (within tolerance)."""


class IllConditioned(BiorthoError):
    """A downdate denominator fell below the safe floor."""


class SingularGram(BiorthoError):
    """The Gram matrix is not numerically positive definite."""

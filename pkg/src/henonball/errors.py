"""Exception hierarchy shared by all solver modules."""


class HenonError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(HenonError, ValueError):
    """A parameter violates a documented precondition."""


class NumericsError(HenonError, RuntimeError):
    """A numerical procedure failed to converge or lost its footing."""


class BracketError(NumericsError):
    """A root or eigenvalue bracket does not contain a sign change."""


class SupercriticalError(NumericsError):
    """The shooting trajectory never crossed zero: the exponent is at or
    above the threshold, or the integration window is too short."""


class DegeneratePointError(NumericsError):
    """Morse index requested at (or too close to) a bifurcation point."""

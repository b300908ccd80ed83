class MargnormError(Exception):
    pass


class InputError(MargnormError, ValueError):
    """Malformed or mismatched input (unknown vertex, shape mismatch, ...)."""


class UnsupportedError(MargnormError):
    """The operation is only defined for a narrower class of models."""


class PreconditionError(MargnormError):
    pass


class GuardError(MargnormError):
    """Input exceeds a desk-scale size guard."""


class InvariantError(MargnormError, AssertionError):
    """A certificate failed to re-verify. Always a bug."""

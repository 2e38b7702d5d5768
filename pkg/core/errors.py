"""
Exception hierarchy shared by the engine and the CLI.

Each exception carries the process exit code the CLI uses for it:
2 for anything wrong with the input, 3 when a resource guard trips.
"""


class TameModError(Exception):
    """Base class for every error raised on purpose by tamemod."""

    exit_code = 2


# ============ INPUT ERRORS (exit 2) ============

class InputError(TameModError, ValueError):
    exit_code = 2


class PresentationError(InputError):
    """A presentation file is malformed or fails its schema."""


class WordSyntaxError(InputError):
    pass


class UnknownConstructorError(InputError):
    pass


class InvalidFunctorError(InputError):
    """A truncated I-functor violates one of its defining relations."""

    def __init__(self, message: str, violation: dict = None):
        super().__init__(message)
        self.violation = violation or {}


class InvalidActionError(InputError):
    """A symmetric-group action fails the involution or braid relations."""


class IllDefinedHomError(InputError):
    """A matrix does not send relations to relations."""


class NotAComplexError(InputError):
    pass


class TruncationExceededError(InputError):
    pass


class FiltrationNotVerifiedError(InputError):
    pass


class IncompatibleProElementError(InputError):
    pass


class MissingStemsError(InputError):
    pass


# ============ RESOURCE GUARDS (exit 3) ============

class ResourceGuardError(TameModError, RuntimeError):
    exit_code = 3

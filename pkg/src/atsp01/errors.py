"""Exception types shared across the package."""


class MalformedInputError(ValueError):
    """An instance, tour, or certificate file cannot be parsed.

    Carries the offending line number when one is known.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class VerificationError(Exception):
    """A certificate or solver artifact failed independent re-verification."""


class InternalInvariantError(Exception):
    """A structural invariant the construction guarantees does not hold.

    Raised in strict mode; indicates a bug in the solver, never bad input.
    """

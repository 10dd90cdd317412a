"""Exception types shared across the package."""


class RoembedError(Exception):
    """Base class for all errors raised by this library."""


class FormulaSyntaxError(RoembedError):
    """Surface text does not match the grammar.

    Carries the character offset of the offending token and, when known,
    what was expected there.
    """

    def __init__(self, message: str, position: int, expected: str | None = None):
        self.position = position
        self.expected = expected
        detail = f"{message} at position {position}"
        if expected is not None:
            detail += f" (expected {expected})"
        super().__init__(detail)


class ReadOnceViolation(RoembedError):
    """A variable occurs more than once in a formula."""

    def __init__(self, var_id: str):
        self.var_id = var_id
        super().__init__(f"variable {var_id!r} occurs more than once")


class DegenerateConstant(RoembedError):
    """Canonicalization reduced the whole formula to a constant."""

    def __init__(self, value: int):
        self.value = value
        super().__init__(f"formula reduces to the constant {value}")


class MissingVariable(RoembedError):
    """An assignment refers to or misses a variable the tree requires."""

    def __init__(self, var_id: str):
        self.var_id = var_id
        super().__init__(f"variable {var_id!r} is not covered by the assignment")


class LengthMismatch(RoembedError):
    """Bit-string arguments have inconsistent or invalid lengths."""


class SizeLimitExceeded(RoembedError):
    """An exhaustive operation was asked to run beyond its configured cap."""


class MalformedCertificate(RoembedError):
    """A certificate is structurally invalid for its target."""


class VerificationFailed(RoembedError):
    """An internally produced certificate failed its own check.

    This signals a bug in the extraction logic, never bad user input.
    """

    def __init__(self, message: str, counterexample=None):
        self.counterexample = counterexample
        if counterexample is not None:
            message += f" (counterexample: {counterexample})"
        super().__init__(message)


class PreconditionFailed(RoembedError):
    """The input does not satisfy an operation's precondition."""

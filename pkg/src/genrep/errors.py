"""Exception types shared by every module.

``InputError`` covers anything the caller can fix (bad schema, violated
precondition); the CLI maps it to exit code 2.  ``VerificationError`` means a
postcondition self-check failed after a construction, which is always a bug;
the CLI maps it to exit code 3.
"""


class InputError(ValueError):
    """Invalid input or violated precondition."""

    def __init__(self, message, *, path=None, witness=None):
        super().__init__(message)
        self.path = path
        self.witness = witness


class VerificationError(RuntimeError):
    """A postcondition check failed on a constructed object."""

    def __init__(self, postcondition, message=""):
        super().__init__(f"{postcondition}: {message}" if message else postcondition)
        self.postcondition = postcondition


class CapExceeded(InputError):
    """An enumeration cap or size guard was hit."""

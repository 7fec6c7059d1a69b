"""Exception types shared across the package."""


class TwoFhaError(Exception):
    """Base class for all package-specific errors."""


class InvalidArgument(TwoFhaError, ValueError):
    """A caller violated an operation precondition."""


class ConstraintUnsatisfiable(TwoFhaError):
    """Generation could not satisfy its constraints within the attempt budget.

    Signals that the requested parameters (count, length, distance, ...)
    are jointly infeasible, not a transient failure.
    """


class UnsupportedAlgorithm(TwoFhaError):
    """Unknown hash algorithm id."""


class ProtocolError(TwoFhaError):
    """Malformed honeychecker protocol line.

    ``reason`` is a short machine-readable token that goes on the wire
    verbatim (``ERR <reason>``).
    """

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class StorageFailure(TwoFhaError):
    """A persistence operation could not complete."""


class UsernameTaken(TwoFhaError):
    """Registration attempted with an existing username."""


class HoneycheckerUnavailable(TwoFhaError):
    """The honeychecker could not be reached; callers must fail closed."""


class SinkUnavailable(TwoFhaError):
    """A delivery sink could not accept the message."""


class RenderFailure(TwoFhaError):
    """QR image rendering failed (missing backend or encode error)."""


class HarnessFailure(TwoFhaError):
    """The attack-simulation harness could not assemble its stack."""

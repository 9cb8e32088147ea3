"""Exception types shared across the package."""


class GraphReasonError(Exception):
    pass


class InputError(GraphReasonError, ValueError):
    """Bad arguments or malformed input data."""


class StateError(GraphReasonError, RuntimeError):
    """An operation was called before its prerequisites were computed."""


class TransportError(GraphReasonError):
    """A chat request failed for good (non-retryable status or retries exhausted)."""

    def __init__(self, message, status=None, attempts=0):
        super().__init__(message)
        self.status = status
        self.attempts = attempts


class CurationError(GraphReasonError):
    pass

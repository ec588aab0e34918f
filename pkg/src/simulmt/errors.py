"""Exception hierarchy shared across the package."""


class SimulMTError(Exception):
    """Base class for every error raised by this package."""


class ContractViolation(SimulMTError, ValueError):
    """A caller broke an operation's precondition."""


class ConfigurationError(SimulMTError, ValueError):
    pass


class PromptError(SimulMTError, ValueError):
    """A prompt could not be rendered or parsed."""


class StructuralError(SimulMTError, ValueError):
    """A rendered example does not have the expected template layout."""


class CorpusError(SimulMTError):
    pass


class ProviderError(SimulMTError):
    """Transport-level failure talking to a model provider.

    Kept separate from :class:`ContractViolation` so the harness can mark an
    instance failed without masking programming errors.
    """


class ProtocolTimeout(ProviderError, TimeoutError):
    pass


class IdMismatchError(ProviderError):
    def __init__(self, expected, got):
        super().__init__(f"response id {got!r} does not match request id {expected!r}")
        self.expected = expected
        self.got = got


class ResponseValidationError(ProviderError):
    """A reply parsed as JSON but violates the wire schema."""

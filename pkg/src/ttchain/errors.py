"""Exception types shared across the library."""


class DenseCapExceeded(ValueError):
    """A dense conversion was requested for a space larger than the cap."""


class ConfigError(ValueError):
    """A run configuration failed schema validation."""


class UnsupportedModelError(ValueError):
    """The requested operation does not support this model."""


class NumericsAbort(RuntimeError):
    """A propagation produced non-finite values and was stopped."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step

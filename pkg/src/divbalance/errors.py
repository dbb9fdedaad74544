"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A configuration value is invalid. ``field`` names the offender."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class ShapeError(ValueError):
    pass


class GenerationError(RuntimeError):
    pass


class TrainingError(RuntimeError):
    """Raised when the reconstruction loss stops being finite."""

    def __init__(self, epoch, loss):
        self.epoch = epoch
        self.loss = loss
        super().__init__(
            f"non-finite loss {loss!r} at epoch {epoch}; retry with a smaller learning_rate"
        )

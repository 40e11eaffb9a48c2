"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid experiment configuration or violated operation precondition."""


class DeadChannelError(ValueError):
    """A sensor's estimated spectral density fell below the admissible floor."""

    def __init__(self, sensor, value, floor, frequency_index=None):
        self.sensor = int(sensor)
        self.value = float(value)
        self.floor = float(floor)
        self.frequency_index = frequency_index
        where = "" if frequency_index is None else f" at frequency index {frequency_index}"
        super().__init__(
            f"sensor {self.sensor} has spectral density {self.value:.3e}{where} "
            f"below floor {self.floor:.1e} (dead channel)"
        )


class NumericalError(RuntimeError):
    """An eigen-decomposition failed its accuracy check."""

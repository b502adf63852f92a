"""Exception types raised across the package."""


class ConfigurationError(ValueError):
    """An invalid parameter set; ``field`` names the offending entry."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class WrongOracleError(ValueError):
    pass


class NumericalConsistencyError(ArithmeticError):
    pass


class EstimationError(ValueError):
    pass


class ProbeError(RuntimeError):
    pass


class StepError(RuntimeError):
    """Failure inside a time-stepping loop, tagged with the step index."""

    def __init__(self, step, cause):
        self.step = step
        super().__init__(f"step {step}: {cause}")

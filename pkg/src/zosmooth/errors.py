"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration or argument; ``key`` names the offending field."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


class EvaluationError(ArithmeticError):
    """The objective returned a non-finite value."""

    def __init__(self, x, value):
        self.x = x
        self.value = value
        super().__init__(f"non-finite objective value {value!r} at x={x!r}")


class DomainError(ValueError):
    """A query point left the inflated feasible set."""

    def __init__(self, x):
        self.x = x
        super().__init__(f"query point outside the inflated domain: {x!r}")

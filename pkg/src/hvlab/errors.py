class ConfigError(ValueError):
    """Invalid run, generator, or CLI configuration."""


class StatisticsError(ArithmeticError):
    """A statistic is undefined for the data given (e.g. no joint events)."""

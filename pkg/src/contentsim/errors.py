class ContentSimError(Exception):
    pass


class ParameterError(ContentSimError, ValueError):
    """Distribution parameters outside their valid domain."""


class UnsupportedParameterError(ParameterError):
    pass


class ConfigError(ContentSimError, ValueError):
    """Simulation configuration is invalid."""


class DegenerateInputError(ContentSimError, ValueError):
    """Sample too small or constant for the requested statistic."""


class DomainError(ContentSimError, ValueError):
    pass


class FormatError(ContentSimError, ValueError):
    """Event log does not follow the expected CSV layout."""


class FixtureSpecError(ContentSimError, ValueError):
    pass

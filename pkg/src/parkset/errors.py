class ParksetError(Exception):
    """Base class for planner errors."""


class InvalidInputError(ParksetError, ValueError):
    pass


class InfeasibleCorridorError(ParksetError, ValueError):
    pass


class SingularFitError(ParksetError, ValueError):
    pass


class UnrepresentableHeadingError(ParksetError, ValueError):
    pass


class NoFeasibleIntermediateError(ParksetError):
    pass


class NoPathError(ParksetError):
    def __init__(self, message: str, stats: dict | None = None):
        super().__init__(message)
        self.stats = dict(stats or {})


class TrackingFailureError(ParksetError):
    def __init__(self, message: str, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class ConfigError(ParksetError, ValueError):
    pass


class ScenarioError(ParksetError, ValueError):
    """Scenario file could not be parsed or validated; ``field`` names the culprit."""

    def __init__(self, message: str, field: str = ""):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field

"""Exception hierarchy shared by all graphflow modules."""


class GraphflowError(Exception):
    """Base class for every error raised by graphflow."""


# graph construction
class GraphError(GraphflowError, ValueError):
    def __init__(self, message: str, pair: tuple[str, str] | None = None):
        super().__init__(message)
        self.pair = pair  # (vertex, edge) for weight errors


class UnknownVertex(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class DisconnectedGraph(GraphError):
    pass


class MissingWeight(GraphError):
    pass


class WeightOutOfRange(GraphError):
    pass


class UnexpectedWeight(GraphError):
    pass


class NonpositiveVelocity(GraphflowError, ValueError):
    pass


# velocities
class BoundViolation(GraphflowError, ValueError):
    pass


class ReversedInterval(GraphflowError, ValueError):
    pass


# transport
class StepTooLarge(GraphflowError, ValueError):
    pass


class DepthExceeded(GraphflowError, RuntimeError):
    pass


# spectral
class SingularBoundarySystem(GraphflowError, ArithmeticError):
    def __init__(self, message: str, condition: float):
        super().__init__(message)
        self.condition = condition


class NotPeriodic(GraphflowError, ValueError):
    pass


class NoConvergence(GraphflowError, RuntimeError):
    def __init__(self, message: str, spread: float):
        super().__init__(message)
        self.spread = spread


# configuration
class ConfigError(GraphflowError):
    """Raised for unusable configuration files; ``path`` names the offending key."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class ParseError(ConfigError):
    pass


class SchemaError(ConfigError):
    pass


class ValidationError(ConfigError):
    pass

# core/errors.py
"""Exception hierarchy shared by the simulator and the command layer."""

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_FAILURE = 3


class HomLinkError(Exception):
    """Base class for every error raised by HomLink."""

    exit_code = EXIT_NUMERICAL_FAILURE


class InvalidParameterError(HomLinkError, ValueError):
    """A physical parameter is non-finite, non-positive or out of its range."""

    exit_code = EXIT_CONFIG_ERROR


class OutOfModelDomainError(HomLinkError, ValueError):
    """The request lies outside the domain where the interference model holds."""

    exit_code = EXIT_CONFIG_ERROR


class ModelConsistencyError(HomLinkError, ArithmeticError):
    """Two evaluations of the same quantity disagree beyond rounding."""


class DegenerateDataError(HomLinkError, ValueError):
    """Data cannot support the requested fit or visibility."""


class NumericalFailure(HomLinkError):
    """An iterative solver did not converge."""


class ConfigError(HomLinkError):
    """Invalid configuration value, carrying the dotted field path."""

    exit_code = EXIT_CONFIG_ERROR

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}")


class SchemaError(HomLinkError):
    """Malformed scan CSV, carrying the 1-based line number."""

    exit_code = EXIT_CONFIG_ERROR

    def __init__(self, line: int, message: str):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}")

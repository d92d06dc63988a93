from typing import Any, Dict, Optional

# Process exit codes, grouped like HTTP status classes.
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


class QHLError(Exception):
    """Base exception for all Hamiltonian-learning errors."""
    def __init__(self, message: str, exit_code: int = EXIT_INTERNAL, **details: Any):
        self.message = message
        self.exit_code = exit_code
        self.details = details
        super().__init__(self.message)

    def to_record(self) -> Dict[str, Any]:
        """Machine-readable error record, printed by the CLI on failure."""
        return {
            "error": type(self).__name__,
            "message": self.message,
            "exit_code": self.exit_code,
            **self.details,
        }

    def __reduce__(self):
        # subclasses take different constructor arguments; rebuild from state
        return _restore_error, (type(self), self.args, self.__dict__)


def _restore_error(cls, args, state):
    error = cls.__new__(cls)
    error.args = args
    error.__dict__.update(state)
    return error


class ConfigError(QHLError):
    """Raised when a recipe or CLI option fails validation."""
    def __init__(self, message: str = "Invalid configuration", **details: Any):
        super().__init__(message, EXIT_USAGE, **details)


class DimensionMismatch(QHLError):
    """Raised when operand shapes are incompatible."""
    def __init__(self, message: str = "Dimension mismatch", **details: Any):
        super().__init__(message, EXIT_USAGE, **details)


class NonHermitianInput(QHLError):
    """Raised when a Hamiltonian fails the Hermiticity check."""
    def __init__(self, message: str = "Matrix is not Hermitian", **details: Any):
        super().__init__(message, EXIT_NUMERICAL, **details)


class NonSquareLength(QHLError):
    """Raised when a vector cannot be reshaped into a square matrix."""
    def __init__(self, message: str = "Vector length is not a perfect square", **details: Any):
        super().__init__(message, EXIT_USAGE, **details)


class StrengthOutOfRange(QHLError):
    """Raised when a noise strength lies outside [0, 1]."""
    def __init__(self, message: str = "Noise strength must lie in [0, 1]", **details: Any):
        super().__init__(message, EXIT_USAGE, **details)


class EmptySchedule(QHLError):
    """Raised when a piecewise generator has no segments."""
    def __init__(self, message: str = "Generator schedule is empty", **details: Any):
        super().__init__(message, EXIT_USAGE, **details)


class ParseError(QHLError):
    """Raised when a channel file is malformed."""
    def __init__(self, message: str, line: int, column: int, **details: Any):
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})", EXIT_IO,
                         line=line, column=column, **details)


class ChannelValidationError(QHLError):
    """Raised when a channel does not satisfy the properties its flags claim."""
    def __init__(self, message: str = "Channel failed validation", **details: Any):
        super().__init__(message, EXIT_NUMERICAL, **details)


class UnsupportedChannelError(QHLError):
    """Raised when a SWAP-noise channel is configured for an unsupported register."""
    def __init__(self, message: str = "Channel noise is only supported for two-qubit IQLE", **details: Any):
        super().__init__(message, EXIT_USAGE, **details)


class InvalidDesign(QHLError):
    """Raised when an experiment design does not fit the model."""
    def __init__(self, message: str = "Invalid experiment design", **details: Any):
        super().__init__(message, EXIT_USAGE, **details)


class ZeroEvidence(QHLError):
    """Raised when an observed datum has vanishing likelihood under every particle."""
    def __init__(self, message: str = "Datum has zero evidence under all particles", **details: Any):
        super().__init__(message, EXIT_NUMERICAL, **details)


class DegenerateCovariance(QHLError):
    """Raised when a covariance cannot be factored even after regularization."""
    def __init__(self, message: str = "Covariance is degenerate", **details: Any):
        super().__init__(message, EXIT_NUMERICAL, **details)


class SingularCovariance(QHLError):
    """Raised when a credible region cannot invert the posterior covariance."""
    def __init__(self, message: str = "Covariance is singular", **details: Any):
        super().__init__(message, EXIT_NUMERICAL, **details)


class DegenerateCloud(QHLError):
    """Raised when the particle guess heuristic cannot find two distinct particles."""
    def __init__(self, message: str = "No distinct particle pair available", **details: Any):
        super().__init__(message, EXIT_NUMERICAL, **details)


class NonPositiveLoss(QHLError):
    """Raised when a loss trace has no positive points left to fit."""
    def __init__(self, message: str = "No positive losses to fit", details: Optional[Dict[str, Any]] = None):
        super().__init__(message, EXIT_NUMERICAL, **(details or {}))

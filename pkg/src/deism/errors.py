"""Exception types shared across the engine, mapped to CLI exit codes."""


class DeismError(Exception):
    """Base class for all engine errors."""

    exit_code = 1


class ConfigError(DeismError):
    """Invalid configuration or inconsistent request (exit code 2)."""

    exit_code = 2


class NumericError(DeismError):
    """Numerical failure: singularities, conditioning, resource limits (exit code 3)."""

    exit_code = 3


class SingularityError(NumericError):
    """Evaluation requested at a singular point (zero distance, x = 0)."""


class ConditioningError(NumericError):
    """Linear system or radial division too ill-conditioned to trust."""


class ResourceError(NumericError):
    """A precomputed table would exceed its memory budget."""


class FormatError(DeismError):
    """Malformed input or output file (exit code 4)."""

    exit_code = 4

    def __init__(self, message, path=None, line=None):
        loc = ""
        if path is not None:
            loc = f"{path}: "
        if line is not None:
            loc += f"line {line}: "
        super().__init__(loc + message)
        self.path = path
        self.line = line

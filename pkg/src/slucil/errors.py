"""Exception hierarchy. Each class carries the CLI exit code for its category."""


class SluCilError(Exception):
    exit_code = 1
    category = "error"


class ConfigError(SluCilError, ValueError):
    exit_code = 2
    category = "config"


class UsageError(SluCilError, RuntimeError):
    exit_code = 2
    category = "usage"


class DimensionError(SluCilError, ValueError):
    exit_code = 3
    category = "dimension"


class InputError(SluCilError, ValueError):
    exit_code = 3
    category = "input"


class IntegrityError(SluCilError, ValueError):
    exit_code = 4
    category = "integrity"


class NumericError(SluCilError, FloatingPointError):
    exit_code = 5
    category = "numeric"

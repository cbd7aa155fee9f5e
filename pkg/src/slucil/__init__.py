"""Class-incremental continual learning for sequence-to-sequence spoken language understanding."""

from .errors import (ConfigError, DimensionError, InputError, IntegrityError, NumericError,
                     SluCilError, UsageError)

__version__ = "0.1.0"

__all__ = ["SluCilError", "ConfigError", "UsageError", "DimensionError", "InputError",
           "IntegrityError", "NumericError", "__version__"]

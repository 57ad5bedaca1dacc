"""Exception types shared across the package."""


class HbftError(Exception):
    """Base class for all package errors."""


class ConfigError(HbftError):
    """Invalid parameter or parameter combination."""


class BudgetError(ConfigError):
    """Memory budget too small for the requested tree."""


class MergeError(HbftError):
    """Bloom filters of different sizes cannot be merged."""


class EmptyInputError(HbftError):
    """Zero-byte inputs cannot be digested."""


class FormatError(HbftError):
    """Malformed serialized filter, digest, or index."""


class PlantingError(HbftError):
    """Could not mutate a file into the requested similarity band."""

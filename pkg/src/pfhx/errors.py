"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid run configuration (bad key, missing value, inconsistent setup)."""

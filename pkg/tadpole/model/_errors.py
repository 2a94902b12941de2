class ConfigError(ValueError):
    """Invalid configuration.

    Covers everything from indivisible image sizes and degenerate mask ratios
    to run-config files that fail validation.
    """


class DatasetError(ValueError):
    """A dataset is empty or incomplete (e.g., an anomalous image without mask)."""

"""Two-stage transformer anomaly detection and localization at desk scale."""

from ._version import __version__

__all__ = ("__version__",)

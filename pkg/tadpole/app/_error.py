class AppError(Exception):
    """Base exception for the app package."""


class VariantError(AppError, ValueError):
    """An ablation variant has inconsistent flags."""

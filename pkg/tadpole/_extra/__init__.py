from ._errors import ExtraImportError

__all__ = ("ExtraImportError",)

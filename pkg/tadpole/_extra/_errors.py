from __future__ import annotations


class ExtraImportError(ImportError):
    """A subpackage needs a third-party package from an uninstalled extra.

    Raise it from the subpackage's `__init__.py`:

        try:
            from ._images import read_image
        except ImportError as exc:
            from .._extra import ExtraImportError

            raise ExtraImportError.from_module_name(__name__) from exc
    """

    def __init__(self, extra_name: str) -> None:
        super().__init__(
            f'tadpole.{extra_name} needs the "{extra_name}" extra. Install it with, '
            f'e.g., "poetry install --extras {extra_name}" or '
            f'"pip install tadpole[{extra_name}]"'
        )
        self.extra_name = extra_name

    @classmethod
    def from_module_name(cls, module_name: str) -> ExtraImportError:
        # "tadpole.io" and "tadpole.io._images" both map to the "io" extra
        return cls(module_name.split(".")[1])

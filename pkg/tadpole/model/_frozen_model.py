from __future__ import annotations

from typing import Any, ClassVar, Self

from pydantic import BaseModel, ConfigDict


class PatchError(ValueError):
    """A dotted patch path does not resolve to a field."""


class FrozenModel(BaseModel):
    """Immutable, strict model that all tadpole configs derive from."""

    model_config: ClassVar[ConfigDict] = ConfigDict(
        frozen=True,
        # Reject misspelled keys
        extra="forbid",
        # Required for the `model_validate(model)` trick in `frozen_patch`
        revalidate_instances="always",
    )

    def frozen_patch(self, patch: dict[str, Any]) -> Self:
        """Return a validated copy with the given dotted paths replaced.

        Example:

            config.frozen_patch({"stage2.loss.lambda2": 0.0})

        Every path must name an existing field. Intermediate path elements must
        be models themselves. The result is validated as a whole, so a patch
        that breaks a cross-field invariant raises `ValidationError`.
        """
        model = self
        for path, value in patch.items():
            model = _assign(model, path.split("."), value, full_path=path)
        return model.model_validate(model)


def _assign(model: Any, fields: list[str], value: Any, *, full_path: str) -> Any:
    first, rest = fields[0], fields[1:]
    if first not in type(model).model_fields:
        raise PatchError(
            f"'{full_path}': {type(model).__name__} has no '{first}' field"
        )
    if not rest:
        return model.model_copy(update={first: value})
    child = getattr(model, first)
    if not isinstance(child, BaseModel):
        raise PatchError(
            f"'{full_path}': {type(model).__name__}.{first} is not a model"
        )
    return model.model_copy(
        update={first: _assign(child, rest, value, full_path=full_path)}
    )

from __future__ import annotations

import logging
from importlib import resources
from pathlib import Path
from typing import Literal

from pydantic import NonNegativeInt, ValidationError

from ..finetune import Stage2Config
from ..model import ConfigError, FrozenModel
from ..nn import ModelConfig
from ..pretrain import PretrainConfig
from ..scoring import ScoreOptions

_LOGGER = logging.getLogger(__name__)

Preset = Literal["desk", "smoke"]


class RunConfig(FrozenModel):
    """Everything a pipeline run depends on besides its inputs."""

    model: ModelConfig = ModelConfig()
    pretrain: PretrainConfig = PretrainConfig()
    stage2: Stage2Config = Stage2Config()
    eval: ScoreOptions = ScoreOptions()
    seed: NonNegativeInt = 0


def parse_run_config(text: str | bytes, *, source: str = "<string>") -> RunConfig:
    """Validate a JSON document as `RunConfig`.

    Raises `ConfigError` that names the JSON path of every offending field.
    """
    try:
        return RunConfig.model_validate_json(text)
    except ValidationError as exc:
        problems = "; ".join(
            f"{_json_path(error['loc'])}: {error['msg']}" for error in exc.errors()
        )
        raise ConfigError(f"Invalid config '{source}': {problems}") from exc


def load_run_config(path: Path) -> RunConfig:
    try:
        text = path.read_text(encoding="utf8")
    except OSError as exc:
        raise ConfigError(f"Can not read config '{path}': {exc}") from exc
    config = parse_run_config(text, source=str(path))
    _LOGGER.debug("Loaded config '%s'", path)
    return config


def load_preset(name: Preset) -> RunConfig:
    """One of the run configs that ship with the package."""
    text = resources.files(__package__).joinpath("presets", f"{name}.json")
    return parse_run_config(text.read_text(encoding="utf8"), source=f"preset:{name}")


def resolve_run_config(
    path: Path | None, *, preset: Preset = "desk", seed: int | None = None
) -> RunConfig:
    """The config at `path` (or `preset` without one), optionally reseeded."""
    config = load_preset(preset) if path is None else load_run_config(path)
    if seed is not None:
        config = config.frozen_patch({"seed": seed})
    return config


def _json_path(loc: tuple[int | str, ...]) -> str:
    if not loc:
        return "<root>"
    path = ""
    for part in loc:
        path += f"[{part}]" if isinstance(part, int) else f".{part}"
    return path.lstrip(".")

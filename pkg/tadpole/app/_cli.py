from __future__ import annotations

import logging
from typing import cast

from anyio import CapacityLimiter
from pydantic_settings import CliSubCommand, SettingsError, get_subcommand

from ..logging import initialize_logging
from ._app import App
from ._commands import (
    AblateCommand,
    AugmentCommand,
    Command,
    EvalCommand,
    PretrainCommand,
    ScoreCommand,
    SynthCommand,
    TrainCommand,
)
from ._error import AppError
from ._settings import AppBaseSettings

_LOGGER = logging.getLogger(__name__)

# Errors that end a command with a logged message instead of a traceback
_EXPECTED_ERRORS = (
    AppError,
    ValueError,
    IndexError,
    OSError,
    FloatingPointError,
    RuntimeError,
)


class TadpoleSettings(AppBaseSettings):
    """Settings of the `tadpole` command. Exactly one verb must be given."""

    synth: CliSubCommand[SynthCommand]
    pretrain: CliSubCommand[PretrainCommand]
    train: CliSubCommand[TrainCommand]
    score: CliSubCommand[ScoreCommand]
    eval: CliSubCommand[EvalCommand]
    ablate: CliSubCommand[AblateCommand]
    augment: CliSubCommand[AugmentCommand]


async def main(settings: TadpoleSettings, limiter: CapacityLimiter) -> None:
    try:
        command = get_subcommand(settings, cli_exit_on_error=False)
    except SettingsError as exc:
        raise AppError(f"Choose a command: {exc}") from exc
    await cast(Command, command).run(limiter)


def cli() -> int:
    """Entry point of the `tadpole` command. Returns the exit status."""
    if not logging.getLogger().handlers:
        initialize_logging()
    try:
        App.launch(main, settings_class=TadpoleSettings)
    except Exception as exc:
        if not is_expected_error(exc):
            raise
        # `App` already logged the error
        return 1
    return 0


def is_expected_error(exc: BaseException) -> bool:
    if isinstance(exc, BaseExceptionGroup):
        return all(is_expected_error(inner) for inner in exc.exceptions)
    return isinstance(exc, _EXPECTED_ERRORS)

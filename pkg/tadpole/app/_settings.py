from __future__ import annotations

from typing import ClassVar

from pydantic import Field, PositiveInt
from pydantic_settings import (
    BaseSettings,
    CliSettingsSource,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
)

APP_NAME = "tadpole"


class AppBaseSettings(BaseSettings):
    """Process-level settings shared by every command.

    Sources, highest precedence first:

     1. Keyword arguments to the constructor
     2. The command line (e.g., `tadpole --threads 4 eval ...`)
     3. Environment variables (e.g., `TADPOLE_THREADS=4`)
     4. A `.env` file in the current directory
    """

    model_config: ClassVar[SettingsConfigDict] = SettingsConfigDict(
        frozen=True,
        extra="forbid",
        env_prefix=f"{APP_NAME}_",
        env_file=".env",
        env_file_encoding="utf-8",
        cli_prog_name=APP_NAME,
    )

    debug: bool = Field(default=False, description="Log at debug level.")
    threads: PositiveInt = Field(
        default=1, description="Worker threads for scoring test images."
    )

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,  # noqa: ARG003
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        return (
            init_settings,
            CliSettingsSource(
                settings_cls, cli_parse_args=True, cli_exit_on_error=False
            ),
            env_settings,
            dotenv_settings,
        )

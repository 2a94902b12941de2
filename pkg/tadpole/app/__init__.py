"""Command-line surface: configs, the ablation matrix and the verbs."""

try:
    from ._ablation import (
        ORDERING_TOLERANCE,
        AblationRow,
        ablate_corpus,
        ablation_csv,
        ablation_markdown,
        check_orderings,
        mean_aucs,
    )
    from ._app import App
    from ._cli import TadpoleSettings, cli, is_expected_error, main
    from ._commands import (
        AblateCommand,
        AugmentCommand,
        Command,
        ConfiguredCommand,
        EvalCommand,
        PretrainCommand,
        ScoreCommand,
        SynthCommand,
        TrainCommand,
    )
    from ._config import (
        Preset,
        RunConfig,
        load_preset,
        load_run_config,
        parse_run_config,
        resolve_run_config,
    )
    from ._error import AppError, VariantError
    from ._pipeline import (
        evaluate_corpus,
        item_seed,
        run_pretrain,
        run_stage2,
        score_images,
    )
    from ._settings import APP_NAME, AppBaseSettings
    from ._variants import (
        VARIANTS,
        AblationVariant,
        InputMode,
        LossTerm,
        VariantId,
        check_variant,
        get_variant,
    )
except ImportError as exc:
    from .._extra import ExtraImportError

    raise ExtraImportError.from_module_name(__name__) from exc

__all__ = (
    "APP_NAME",
    "ORDERING_TOLERANCE",
    "VARIANTS",
    "AblateCommand",
    "AblationRow",
    "AblationVariant",
    "App",
    "AppBaseSettings",
    "AppError",
    "AugmentCommand",
    "Command",
    "ConfiguredCommand",
    "EvalCommand",
    "InputMode",
    "LossTerm",
    "Preset",
    "PretrainCommand",
    "RunConfig",
    "ScoreCommand",
    "SynthCommand",
    "TadpoleSettings",
    "TrainCommand",
    "VariantError",
    "VariantId",
    "ablate_corpus",
    "ablation_csv",
    "ablation_markdown",
    "check_orderings",
    "check_variant",
    "cli",
    "evaluate_corpus",
    "get_variant",
    "is_expected_error",
    "item_seed",
    "load_preset",
    "load_run_config",
    "main",
    "mean_aucs",
    "parse_run_config",
    "resolve_run_config",
    "run_pretrain",
    "run_stage2",
    "score_images",
)

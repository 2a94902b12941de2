"""Glue between corpora, the two training stages, scoring and evaluation."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from functools import partial

import numpy as np
from anyio import CapacityLimiter, create_task_group, to_thread
from numpy.typing import NDArray

from ..finetune import PROGRESS_COLUMNS as STAGE2_COLUMNS
from ..finetune import stage2_train
from ..io import Corpus
from ..logging import CsvProgress, log_duration
from ..metrics import EvalReport, ScoredItem, evaluate
from ..model import ConfigError, DatasetError
from ..nn import ModelParams, init_params
from ..pretrain import PROGRESS_COLUMNS as STAGE1_COLUMNS
from ..pretrain import pretrain
from ..scoring import ScoreMaps, ScoreOptions, ScoreVariant, score_image
from ._config import RunConfig
from ._error import AppError

_LOGGER = logging.getLogger(__name__)

# Keeps the stage-1 mask stream apart from every other use of the run seed
_STAGE1_STREAM = 1


def stage1_progress(*, echo: bool = True) -> CsvProgress:
    return CsvProgress(STAGE1_COLUMNS, echo=echo)


def stage2_progress(*, echo: bool = True) -> CsvProgress:
    return CsvProgress(STAGE2_COLUMNS, echo=echo)


def run_pretrain(
    config: RunConfig,
    dataset: NDArray[np.floating],
    *,
    progress: CsvProgress | None = None,
) -> ModelParams:
    """Initialize a model from `config.seed` and run stage 1 on `dataset`."""
    params = init_params(config.model, seed=config.seed)
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, _STAGE1_STREAM]))
    with log_duration("Stage 1", log_level=logging.INFO):
        pretrain(params, dataset, config.pretrain, rng, progress=progress)
    return params


def run_stage2(
    config: RunConfig,
    dataset: NDArray[np.floating],
    *,
    init: ModelParams | None = None,
    progress: CsvProgress | None = None,
) -> ModelParams:
    """Run stage 2 on a copy of `init` (or on a fresh model without it).

    A frozen encoder only makes sense on top of stage 1, so
    `config.stage2.freeze_encoder` requires `init`.
    """
    if init is None:
        if config.stage2.freeze_encoder:
            raise AppError(
                "Stage 2 with a frozen encoder needs stage-1 parameters to start from"
            )
        params = init_params(config.model, seed=config.seed)
    else:
        if init.config != config.model:
            raise ConfigError(
                "The stage-1 parameters were trained for a different architecture. "
                f"Parameters: {init.config.model_dump()} "
                f"Config: {config.model.model_dump()}"
            )
        params = init.copy()
    with log_duration("Stage 2", log_level=logging.INFO):
        stage2_train(
            params, dataset, config.stage2, base_seed=config.seed, progress=progress
        )
    return params


def item_seed(seed: int, index: int) -> int:
    """Seed of the `index`th image of a scoring pass."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


async def score_images(
    params: ModelParams,
    images: Sequence[NDArray[np.floating]],
    variant: ScoreVariant,
    options: ScoreOptions,
    *,
    seed: int,
    limiter: CapacityLimiter | None = None,
) -> list[ScoreMaps]:
    """Score every image on worker threads. Results keep the input order.

    The result does not depend on the number of threads.
    """
    results: dict[int, ScoreMaps] = {}

    async def _score(index: int, image: NDArray[np.floating]) -> None:
        func = partial(
            score_image,
            params,
            image,
            variant,
            seed=item_seed(seed, index),
            options=options,
        )
        results[index] = await to_thread.run_sync(func, limiter=limiter)

    with log_duration(f"Scoring {len(images)} image(s)"):
        async with create_task_group() as tg:
            for index, image in enumerate(images):
                tg.start_soon(_score, index, image)
    return [results[index] for index in range(len(images))]


async def evaluate_corpus(
    params: ModelParams,
    corpus: Corpus,
    variant: ScoreVariant,
    options: ScoreOptions,
    *,
    seed: int,
    limiter: CapacityLimiter | None = None,
) -> EvalReport:
    """Score every test image of `corpus` and compute both AUCs."""
    if not corpus.test:
        raise DatasetError(f"'{corpus.name}' has no test images")
    if params.config.image_size != corpus.test[0].image.shape[-1]:
        raise ConfigError(
            f"The model expects {params.config.image_size}-pixel images but "
            f"'{corpus.name}' holds {corpus.test[0].image.shape[-1]}-pixel ones"
        )
    maps = await score_images(
        params,
        [item.image for item in corpus.test],
        variant,
        options,
        seed=seed,
        limiter=limiter,
    )
    scored = [
        ScoredItem(
            name=item.name,
            anomalous=item.anomalous,
            image_score=result.image_score,
            score_map=result.score,
            mask=item.mask,
        )
        for item, result in zip(corpus.test, maps, strict=True)
    ]
    return evaluate(corpus.name, scored)

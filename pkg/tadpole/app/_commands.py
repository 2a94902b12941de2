"""The `tadpole` verbs. Each one is a pydantic-settings CLI subcommand."""

from __future__ import annotations

import csv
import io
import logging
from pathlib import Path

import numpy as np
from anyio import CapacityLimiter
from numpy.typing import NDArray
from pydantic import Field, NonNegativeInt, PositiveInt

from ..augment import make_epoch_stream
from ..checkpoint import (
    ContainerHeader,
    Stage,
    atomic_write_text,
    load_checkpoint,
    save_checkpoint,
    save_tensors,
)
from ..io import (
    Category,
    Corpus,
    DefectKind,
    SynthSpec,
    generate_synthetic,
    list_categories,
    load_corpus,
    read_image,
    write_heatmap,
    write_image,
    write_mask,
)
from ..metrics import reports_to_csv, reports_to_json
from ..model import DatasetError, FrozenModel
from ._ablation import (
    ablate_corpus,
    ablation_csv,
    ablation_markdown,
    check_orderings,
    mean_aucs,
)
from ._config import Preset, RunConfig, resolve_run_config
from ._error import AppError, VariantError
from ._pipeline import (
    evaluate_corpus,
    run_pretrain,
    run_stage2,
    score_images,
    stage1_progress,
    stage2_progress,
)
from ._variants import VARIANTS, VariantId, get_variant

_LOGGER = logging.getLogger(__name__)

_IMAGE_SUFFIXES = (".png", ".ppm", ".pgm")


class Command(FrozenModel):
    async def run(self, limiter: CapacityLimiter) -> None:
        raise NotImplementedError


class ConfiguredCommand(Command):
    """A command that depends on a `RunConfig`."""

    config: Path | None = Field(
        default=None, description="Run config JSON. Defaults to the preset."
    )
    preset: Preset = Field(
        default="desk", description="Packaged run config used without --config."
    )
    seed: NonNegativeInt | None = Field(
        default=None, description="Override the seed of the run config."
    )

    def run_config(self) -> RunConfig:
        return resolve_run_config(self.config, preset=self.preset, seed=self.seed)


class SynthCommand(Command):
    """Write procedurally textured categories with planted defects."""

    out: Path
    categories: list[Category] = Field(
        default_factory=lambda: ["stripes", "checker", "blobs"]
    )
    image_size: PositiveInt = 64
    n_train: PositiveInt = 60
    n_test_normal: PositiveInt = 10
    n_test_anomalous: PositiveInt = 10
    defects: list[DefectKind] = Field(
        default_factory=lambda: ["color_blob", "noise_patch", "scratch_line"]
    )
    seed: NonNegativeInt = 0

    async def run(self, limiter: CapacityLimiter) -> None:  # noqa: ARG002
        for category in self.categories:
            spec = SynthSpec(
                category=category,
                image_size=self.image_size,
                n_train=self.n_train,
                n_test_normal=self.n_test_normal,
                n_test_anomalous=self.n_test_anomalous,
                defects=tuple(self.defects),
                seed=self.seed,
            )
            generate_synthetic(spec, root=self.out)


class PretrainCommand(ConfiguredCommand):
    """Stage 1: masked reconstruction training on one category."""

    data: Path = Field(description="Category directory (MVTec layout).")
    out: Path

    async def run(self, limiter: CapacityLimiter) -> None:  # noqa: ARG002
        config = self.run_config()
        corpus = load_corpus(self.data, image_size=config.model.image_size)
        progress = stage1_progress()
        params = run_pretrain(config, corpus.train_array(), progress=progress)
        save_checkpoint(
            self.out / "stage1.tadc",
            params,
            stage="stage1",
            seed=config.seed,
            meta={"corpus": corpus.name},
        )
        atomic_write_text(self.out / "stage1_progress.csv", progress.to_csv())


class TrainCommand(ConfiguredCommand):
    """Stage 2: decoder and both heads on top of a stage-1 checkpoint."""

    data: Path = Field(description="Category directory (MVTec layout).")
    init: Path | None = Field(
        default=None, description="Stage-1 checkpoint to start from."
    )
    out: Path
    variant: VariantId = "OURS"

    async def run(self, limiter: CapacityLimiter) -> None:  # noqa: ARG002
        variant = get_variant(self.variant)
        if not variant.has_stage2:
            raise VariantError(
                f"Variant {variant.id} has no stage 2. Score its stage-1 "
                "checkpoint directly."
            )
        config = variant.apply(self.run_config())
        init = None
        lineage: tuple[Stage, ...] = ()
        if variant.pretrain:
            if self.init is None:
                raise VariantError(
                    f"Variant {variant.id} builds on stage 1. Pass --init."
                )
            init, header = load_checkpoint(
                self.init,
                expect_config=config.model,
                expect_stage="stage1",
                require_stage1=True,
            )
            lineage = header.lineage
        elif self.init is not None:
            raise VariantError(
                f"Variant {variant.id} trains from scratch. Drop --init."
            )
        corpus = load_corpus(self.data, image_size=config.model.image_size)
        progress = stage2_progress()
        params = run_stage2(config, corpus.train_array(), init=init, progress=progress)
        save_checkpoint(
            self.out / "stage2.tadc",
            params,
            stage="stage2",
            seed=config.seed,
            lineage=lineage,
            meta={"corpus": corpus.name, "variant": variant.id},
        )
        atomic_write_text(self.out / "stage2_progress.csv", progress.to_csv())


class ScoreCommand(ConfiguredCommand):
    """Write heatmaps and image scores for individual images."""

    checkpoint: Path
    images: list[Path] = Field(description="Image files or directories of images.")
    out: Path
    variant: VariantId = "OURS"
    png: bool = Field(default=False, description="Also write 8-bit PNG heatmaps.")
    dump_maps: bool = Field(
        default=False, description="Also dump the raw E, P and S maps."
    )

    async def run(self, limiter: CapacityLimiter) -> None:
        variant = get_variant(self.variant)
        config = self.run_config()
        params, header = load_checkpoint(self.checkpoint)
        if header.stage == "stage1" and variant.score != "masked_e":
            _LOGGER.warning(
                "'%s' holds stage-1 parameters. Its heads are not trained for "
                "%s scoring.",
                self.checkpoint,
                variant.score,
            )
        files = _image_files(self.images)
        images = [read_image(f, image_size=params.config.image_size) for f in files]
        maps = await score_images(
            params,
            images,
            variant.score,
            config.eval,
            seed=config.seed,
            limiter=limiter,
        )
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(("name", "image_score"))
        dumped: dict[str, NDArray[np.floating]] = {}
        for file, result in zip(files, maps, strict=True):
            heatmap = self.out / f"{file.stem}_score.pgm"
            write_heatmap(heatmap, result.score, png=self.png)
            writer.writerow((file.stem, repr(result.image_score)))
            dumped[f"{file.stem}/error"] = result.error
            dumped[f"{file.stem}/probability"] = result.probability
            dumped[f"{file.stem}/score"] = result.score
        atomic_write_text(self.out / "scores.csv", buffer.getvalue())
        if self.dump_maps:
            maps_header = ContainerHeader(
                stage="maps",
                seed=config.seed,
                meta={"checkpoint": self.checkpoint.name, "variant": variant.id},
            )
            save_tensors(self.out / "maps.tadc", dumped, maps_header)


class EvalCommand(ConfiguredCommand):
    """Image and pixel AUC of a checkpoint on labelled test images."""

    checkpoint: Path
    data: Path = Field(description="Category directory or a directory of them.")
    out: Path
    variant: VariantId = "OURS"

    async def run(self, limiter: CapacityLimiter) -> None:
        variant = get_variant(self.variant)
        config = self.run_config()
        params, _ = load_checkpoint(self.checkpoint)
        reports = [
            await evaluate_corpus(
                params,
                corpus,
                variant.score,
                config.eval,
                seed=config.seed,
                limiter=limiter,
            )
            for corpus in _load_corpora(self.data, params.config.image_size)
        ]
        atomic_write_text(self.out / "report.csv", reports_to_csv(reports))
        atomic_write_text(self.out / "report.json", reports_to_json(reports))


class AblateCommand(ConfiguredCommand):
    """Train and evaluate the ablation variants on every category."""

    data: Path = Field(description="Category directory or a directory of them.")
    out: Path
    variants: list[VariantId] = Field(default_factory=lambda: list(VARIANTS))
    strict_order: bool = Field(
        default=False, description="Fail if an expected AUC ordering is violated."
    )

    async def run(self, limiter: CapacityLimiter) -> None:
        config = self.run_config()
        # All variants must be consistent before anything trains
        variants = [get_variant(variant_id) for variant_id in self.variants]
        for variant in variants:
            variant.apply(config)
        rows = []
        for corpus in _load_corpora(self.data, config.model.image_size):
            rows += await ablate_corpus(
                config, corpus, variants, out=self.out, limiter=limiter
            )
        atomic_write_text(self.out / "ablation.csv", ablation_csv(rows))
        atomic_write_text(self.out / "ablation.md", ablation_markdown(rows))
        violations = check_orderings(mean_aucs(rows))
        if violations and self.strict_order:
            raise AppError(f"Ablation orderings violated: {'; '.join(violations)}")


class AugmentCommand(ConfiguredCommand):
    """Dump original, corrupted and label images of one augmentation epoch."""

    data: Path = Field(description="Category directory (MVTec layout).")
    out: Path
    count: PositiveInt = 8
    epoch: NonNegativeInt = 0

    async def run(self, limiter: CapacityLimiter) -> None:  # noqa: ARG002
        config = self.run_config()
        corpus = load_corpus(self.data, image_size=config.model.image_size)
        stream = make_epoch_stream(
            corpus.train_array(), config.stage2.corruption, self.epoch, config.seed
        )
        for sample in stream[: self.count]:
            stem = f"{sample.index:03d}"
            write_image(self.out / f"{stem}_original.png", sample.original)
            write_image(self.out / f"{stem}_corrupted.png", sample.corrupted)
            write_mask(self.out / f"{stem}_mask.png", sample.label)


def _image_files(paths: list[Path]) -> list[Path]:
    files: list[Path] = []
    for path in paths:
        if path.is_dir():
            files += sorted(
                f for f in path.iterdir() if f.suffix.lower() in _IMAGE_SUFFIXES
            )
        else:
            files.append(path)
    if not files:
        raise DatasetError("No images to score")
    stems = [file.stem for file in files]
    duplicates = sorted({stem for stem in stems if stems.count(stem) > 1})
    if duplicates:
        raise AppError(f"Image names must be unique. Duplicates: {duplicates}")
    return files


def _load_corpora(data: Path, image_size: int) -> list[Corpus]:
    if not data.is_dir():
        raise DatasetError(f"'{data}' is not a directory")
    categories = list_categories(data)
    if not categories:
        raise DatasetError(f"'{data}' holds no category directories")
    return [load_corpus(path, image_size=image_size) for path in categories]

from __future__ import annotations

import csv
import io
import logging
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

from anyio import CapacityLimiter

from ..checkpoint import atomic_write_text, save_checkpoint
from ..io import Corpus
from ..metrics import EvalReport, reports_to_json
from ..nn import ModelParams
from ._config import RunConfig
from ._pipeline import (
    evaluate_corpus,
    run_pretrain,
    run_stage2,
    stage1_progress,
    stage2_progress,
)
from ._variants import AblationVariant, VariantId, check_variant

_LOGGER = logging.getLogger(__name__)

ORDERING_TOLERANCE = 0.02

# (better, worse): the mean image AUC of `better` should not fall short of
# the one of `worse` by more than the tolerance
_EXPECTED_ORDER: tuple[tuple[VariantId, VariantId], ...] = (
    ("OURS", "VII"),
    ("OURS", "VIII"),
    ("VII", "III"),
    ("VIII", "IV"),
)
_SINGLE_SCORE: tuple[VariantId, ...] = ("II", "III", "IV", "VI", "VII", "VIII")


@dataclass(frozen=True)
class AblationRow:
    variant: VariantId
    report: EvalReport


async def ablate_corpus(
    config: RunConfig,
    corpus: Corpus,
    variants: Sequence[AblationVariant],
    *,
    out: Path | None = None,
    limiter: CapacityLimiter | None = None,
) -> list[AblationRow]:
    """Train and evaluate each variant on `corpus`, one after the other.

    Every variant that builds on stage 1 shares a single stage-1 model.
    With `out`, the shared stage-1 checkpoint and the per-variant reports
    go to `out/<corpus>/`.
    """
    for variant in variants:
        check_variant(variant)
    configs = {variant.id: variant.apply(config) for variant in variants}
    dataset = corpus.train_array()
    directory = None if out is None else out / corpus.name
    stage1: ModelParams | None = None
    if any(variant.needs_stage1 for variant in variants):
        _LOGGER.info("Shared stage 1 for '%s'", corpus.name)
        progress = stage1_progress(echo=False)
        stage1 = run_pretrain(config, dataset, progress=progress)
        if directory is not None:
            save_checkpoint(
                directory / "stage1.tadc", stage1, stage="stage1", seed=config.seed
            )
            atomic_write_text(directory / "stage1_progress.csv", progress.to_csv())
    rows: list[AblationRow] = []
    for variant in variants:
        _LOGGER.info("Variant %s on '%s'", variant.id, corpus.name)
        variant_config = configs[variant.id]
        if variant.has_stage2:
            progress = stage2_progress(echo=False)
            params = run_stage2(
                variant_config,
                dataset,
                init=stage1 if variant.pretrain else None,
                progress=progress,
            )
            if directory is not None:
                atomic_write_text(
                    directory / f"{variant.id}_progress.csv", progress.to_csv()
                )
        else:
            assert stage1 is not None
            params = stage1
        report = await evaluate_corpus(
            params,
            corpus,
            variant.score,
            variant_config.eval,
            seed=variant_config.seed,
            limiter=limiter,
        )
        rows.append(AblationRow(variant=variant.id, report=report))
    if directory is not None:
        atomic_write_text(
            directory / "reports.json", reports_to_json([row.report for row in rows])
        )
    return rows


def mean_aucs(rows: Sequence[AblationRow]) -> dict[VariantId, tuple[float, float]]:
    """Mean (image AUC, pixel AUC) over the categories of each variant."""
    grouped: dict[VariantId, list[EvalReport]] = {}
    for row in rows:
        grouped.setdefault(row.variant, []).append(row.report)
    return {
        variant: (
            sum(report.image_auc for report in reports) / len(reports),
            sum(report.pixel_auc for report in reports) / len(reports),
        )
        for variant, reports in grouped.items()
    }


def check_orderings(
    means: dict[VariantId, tuple[float, float]],
    *,
    tolerance: float = ORDERING_TOLERANCE,
) -> list[str]:
    """Return (and log) every violated ordering of the mean image AUCs.

    Orderings that involve a variant missing from `means` are skipped.
    """
    image = {variant: aucs[0] for variant, aucs in means.items()}
    pairs = [pair for pair in _EXPECTED_ORDER if pair[0] in image and pair[1] in image]
    singles = [variant for variant in _SINGLE_SCORE if variant in image]
    if "OURS" in image and singles:
        best = max(singles, key=lambda variant: image[variant])
        pairs.append(("OURS", best))
    violations = [
        f"{better} ({image[better]:.4f}) < {worse} ({image[worse]:.4f}) - {tolerance}"
        for better, worse in pairs
        if image[better] < image[worse] - tolerance
    ]
    for violation in violations:
        _LOGGER.warning("Ablation ordering violated: %s", violation)
    return violations


def ablation_csv(rows: Sequence[AblationRow]) -> str:
    """`variant,category,image_auc,pixel_auc`, then one "mean" row per variant."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(("variant", "category", "image_auc", "pixel_auc"))
    for row in rows:
        writer.writerow(
            (
                row.variant,
                row.report.category,
                repr(row.report.image_auc),
                repr(row.report.pixel_auc),
            )
        )
    for variant, (image_auc, pixel_auc) in mean_aucs(rows).items():
        writer.writerow((variant, "mean", repr(image_auc), repr(pixel_auc)))
    return buffer.getvalue()


def ablation_markdown(rows: Sequence[AblationRow]) -> str:
    """One table for image AUC and one for pixel AUC.

    Categories are rows and variants are columns, with a final mean row.
    """
    variants = list(dict.fromkeys(row.variant for row in rows))
    categories = list(dict.fromkeys(row.report.category for row in rows))
    lookup = {(row.variant, row.report.category): row.report for row in rows}
    means = mean_aucs(rows)
    sections: list[str] = []
    for title, level in (("Image AUC", 0), ("Pixel AUC", 1)):
        lines = [
            f"## {title}",
            "",
            "| category | " + " | ".join(variants) + " |",
            "|---" * (len(variants) + 1) + "|",
        ]
        for category in categories:
            cells = []
            for variant in variants:
                report = lookup.get((variant, category))
                value = None if report is None else (report.image_auc, report.pixel_auc)
                cells.append("-" if value is None else f"{value[level]:.3f}")
            lines.append(f"| {category} | " + " | ".join(cells) + " |")
        mean_cells = [f"{means[variant][level]:.3f}" for variant in variants]
        lines.append("| **mean** | " + " | ".join(mean_cells) + " |")
        sections.append("\n".join(lines))
    return "\n\n".join(sections) + "\n"

"""The ablation matrix: eight single-purpose models and the full two-stage one."""

from __future__ import annotations

from typing import Literal

from ..model import FrozenModel
from ..scoring import ScoreVariant
from ._config import RunConfig
from ._error import VariantError

VariantId = Literal["I", "II", "III", "IV", "V", "VI", "VII", "VIII", "OURS"]
InputMode = Literal["masked", "clean", "corrupted"]
LossTerm = Literal["mse", "ssim", "ce"]

_LOSS_WEIGHTS: dict[LossTerm, str] = {
    "mse": "lambda0",
    "ssim": "lambda1",
    "ce": "lambda2",
}


class AblationVariant(FrozenModel):
    """One row of the ablation matrix.

    `pretrain` means that stage 2 starts from the shared stage-1 encoder and
    keeps it frozen. Without it, stage 2 trains every parameter from a fresh
    initialization. The "masked" input mode has no stage 2 at all: the
    stage-1 model scores images by masked reconstruction.
    """

    id: VariantId
    pretrain: bool
    input_mode: InputMode
    losses: frozenset[LossTerm]
    score: ScoreVariant

    @property
    def needs_stage1(self) -> bool:
        return self.pretrain or self.input_mode == "masked"

    @property
    def has_stage2(self) -> bool:
        return self.input_mode != "masked"

    def apply(self, config: RunConfig) -> RunConfig:
        """Derive the run config of this variant from a base config.

        Raises `VariantError` for inconsistent flags before touching `config`.
        """
        check_variant(self)
        if not self.has_stage2:
            return config
        # Only the active terms keep the base weights
        patch: dict[str, object] = {
            f"stage2.loss.{weight}": 0.0
            for term, weight in _LOSS_WEIGHTS.items()
            if term not in self.losses
        }
        patch["stage2.input_mode"] = self.input_mode
        patch["stage2.freeze_encoder"] = self.pretrain
        return config.frozen_patch(patch)


def check_variant(variant: AblationVariant) -> None:
    """Raise `VariantError` if the flags of `variant` contradict each other."""
    reconstruction = variant.losses & {"mse", "ssim"}
    classification = "ce" in variant.losses
    match variant.score:
        case "masked_e":
            if variant.input_mode != "masked" or variant.losses:
                raise VariantError(
                    f"Variant {variant.id}: masked scoring uses the stage-1 model "
                    "as is and takes neither stage-2 losses nor another input mode"
                )
            if variant.pretrain:
                raise VariantError(
                    f"Variant {variant.id}: masked scoring has no stage 2 to pretrain"
                )
        case "e_only":
            if classification or not reconstruction:
                raise VariantError(
                    f"Variant {variant.id}: E-only scoring needs a reconstruction "
                    f"loss and forbids the 'ce' loss (losses: {sorted(variant.losses)})"
                )
        case "p_only":
            if reconstruction or not classification:
                raise VariantError(
                    f"Variant {variant.id}: P-only scoring trains the 'ce' loss alone "
                    f"(losses: {sorted(variant.losses)})"
                )
        case "fusion":
            if not (classification and reconstruction):
                raise VariantError(
                    f"Variant {variant.id}: fusion scoring needs a reconstruction loss "
                    f"and the 'ce' loss (losses: {sorted(variant.losses)})"
                )
    if variant.input_mode == "masked" and variant.score != "masked_e":
        raise VariantError(f"Variant {variant.id}: masked input needs masked scoring")
    if variant.input_mode == "clean" and classification:
        raise VariantError(
            f"Variant {variant.id}: clean input has no corrupted pixels to classify"
        )


_RECONSTRUCTION: frozenset[LossTerm] = frozenset({"mse", "ssim"})
_CLASSIFICATION: frozenset[LossTerm] = frozenset({"ce"})
_ALL_LOSSES: frozenset[LossTerm] = frozenset({"mse", "ssim", "ce"})


def _variant(
    id_: VariantId,
    *,
    pretrain: bool,
    input_mode: InputMode,
    losses: frozenset[LossTerm],
    score: ScoreVariant,
) -> AblationVariant:
    return AblationVariant(
        id=id_, pretrain=pretrain, input_mode=input_mode, losses=losses, score=score
    )


VARIANTS: dict[VariantId, AblationVariant] = {
    variant.id: variant
    for variant in (
        # Plain masked autoencoder
        _variant(
            "I",
            pretrain=False,
            input_mode="masked",
            losses=frozenset(),
            score="masked_e",
        ),
        # Autoencoder
        _variant(
            "II",
            pretrain=False,
            input_mode="clean",
            losses=_RECONSTRUCTION,
            score="e_only",
        ),
        # Denoising autoencoder
        _variant(
            "III",
            pretrain=False,
            input_mode="corrupted",
            losses=_RECONSTRUCTION,
            score="e_only",
        ),
        # Pixel classifier
        _variant(
            "IV",
            pretrain=False,
            input_mode="corrupted",
            losses=_CLASSIFICATION,
            score="p_only",
        ),
        _variant(
            "V",
            pretrain=False,
            input_mode="corrupted",
            losses=_ALL_LOSSES,
            score="fusion",
        ),
        _variant(
            "VI",
            pretrain=True,
            input_mode="clean",
            losses=_RECONSTRUCTION,
            score="e_only",
        ),
        # The full model without the pixel classification loss
        _variant(
            "VII",
            pretrain=True,
            input_mode="corrupted",
            losses=_RECONSTRUCTION,
            score="e_only",
        ),
        # The full model without the reconstruction losses
        _variant(
            "VIII",
            pretrain=True,
            input_mode="corrupted",
            losses=_CLASSIFICATION,
            score="p_only",
        ),
        _variant(
            "OURS",
            pretrain=True,
            input_mode="corrupted",
            losses=_ALL_LOSSES,
            score="fusion",
        ),
    )
}


def get_variant(variant_id: str) -> AblationVariant:
    try:
        return VARIANTS[variant_id]  # type: ignore[index]
    except KeyError:
        raise VariantError(
            f"Unknown variant '{variant_id}'. Choose from {', '.join(VARIANTS)}."
        ) from None

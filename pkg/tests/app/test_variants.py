import pytest

from tadpole.app import (
    VARIANTS,
    AblationVariant,
    VariantError,
    check_variant,
    get_variant,
    load_preset,
)


def test_matrix() -> None:
    assert list(VARIANTS) == [
        "I", "II", "III", "IV", "V", "VI", "VII", "VIII", "OURS"
    ]  # fmt: skip
    pretrained = {id_ for id_, variant in VARIANTS.items() if variant.pretrain}
    assert pretrained == {"VI", "VII", "VIII", "OURS"}
    assert VARIANTS["I"].needs_stage1
    assert not VARIANTS["I"].has_stage2
    assert not VARIANTS["II"].needs_stage1
    assert VARIANTS["OURS"].losses == {"mse", "ssim", "ce"}
    assert VARIANTS["OURS"].score == "fusion"
    for variant in VARIANTS.values():
        check_variant(variant)


@pytest.mark.parametrize(
    ("input_mode", "losses", "score", "match"),
    [
        ("masked", {"mse"}, "masked_e", "masked scoring"),
        ("corrupted", set(), "masked_e", "masked scoring"),
        ("corrupted", {"mse", "ce"}, "e_only", "E-only"),
        ("corrupted", {"ce", "ssim"}, "p_only", "P-only"),
        ("corrupted", {"ce"}, "fusion", "fusion"),
        ("masked", set(), "e_only", "E-only"),
        ("clean", {"ce"}, "p_only", "clean input"),
    ],
)
def test_inconsistent_variants(
    input_mode: str, losses: set[str], score: str, match: str
) -> None:
    variant = AblationVariant.model_validate(
        {
            "id": "V",
            "pretrain": False,
            "input_mode": input_mode,
            "losses": losses,
            "score": score,
        }
    )
    with pytest.raises(VariantError, match=match):
        check_variant(variant)
    with pytest.raises(VariantError):
        variant.apply(load_preset("smoke"))


def test_unknown_variant() -> None:
    assert get_variant("VII") is VARIANTS["VII"]
    with pytest.raises(VariantError, match="Unknown variant 'IX'"):
        get_variant("IX")


def test_apply_masked_keeps_config() -> None:
    config = load_preset("smoke")
    assert VARIANTS["I"].apply(config) == config


def test_apply_autoencoder() -> None:
    config = load_preset("smoke")
    derived = VARIANTS["II"].apply(config)
    assert derived.stage2.loss.lambda0 == config.stage2.loss.lambda0
    assert derived.stage2.loss.lambda1 == config.stage2.loss.lambda1
    assert derived.stage2.loss.lambda2 == 0.0
    assert derived.stage2.input_mode == "clean"
    assert derived.stage2.freeze_encoder is False
    # Everything outside stage 2 stays
    assert derived.model == config.model
    assert derived.pretrain == config.pretrain


def test_apply_pixel_classifier() -> None:
    derived = VARIANTS["VIII"].apply(load_preset("smoke"))
    assert derived.stage2.loss.lambda0 == 0.0
    assert derived.stage2.loss.lambda1 == 0.0
    assert derived.stage2.loss.lambda2 == 1.0
    assert derived.stage2.freeze_encoder is True


def test_no_classification_equals_zero_weight() -> None:
    config = load_preset("smoke")
    without_ce = config.frozen_patch({"stage2.loss.lambda2": 0.0})
    assert VARIANTS["VII"].apply(config) == VARIANTS["OURS"].apply(without_ce)

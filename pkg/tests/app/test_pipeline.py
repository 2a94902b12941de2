import anyio
import numpy as np
import pytest
from anyio import CapacityLimiter

from tadpole.app import (
    AppError,
    RunConfig,
    evaluate_corpus,
    item_seed,
    load_preset,
    run_pretrain,
    run_stage2,
    score_images,
)
from tadpole.io import Corpus, TestItem
from tadpole.model import ConfigError, DatasetError
from tadpole.nn import ModelParams, init_params
from tadpole.scoring import ScoreMaps, ScoreOptions, score_image

from ..conftest import TINY_CONFIG, random_images


def test_item_seed() -> None:
    assert item_seed(0, 3) == item_seed(0, 3)
    seeds = {item_seed(seed, index) for seed in range(3) for index in range(10)}
    assert len(seeds) == 30


def _score_all(
    params: ModelParams, images: np.ndarray, threads: int
) -> list[ScoreMaps]:
    async def main() -> list[ScoreMaps]:
        return await score_images(
            params,
            list(images),
            "masked_e",
            ScoreOptions(masked_draws=2),
            seed=5,
            limiter=CapacityLimiter(threads),
        )

    return anyio.run(main)


def test_score_images_keeps_order(tiny_params: ModelParams) -> None:
    images = random_images(5, seed=3)
    results = _score_all(tiny_params, images, threads=3)
    for index, (image, result) in enumerate(zip(images, results, strict=True)):
        expected = score_image(
            tiny_params,
            image,
            "masked_e",
            seed=item_seed(5, index),
            options=ScoreOptions(masked_draws=2),
        )
        np.testing.assert_array_equal(result.score, expected.score)
        assert result.image_score == expected.image_score


def test_score_images_ignores_thread_count(tiny_params: ModelParams) -> None:
    images = random_images(4, seed=4)
    single = _score_all(tiny_params, images, threads=1)
    multi = _score_all(tiny_params, images, threads=3)
    for a, b in zip(single, multi, strict=True):
        np.testing.assert_array_equal(a.score, b.score)


def test_frozen_stage2_needs_stage1(tiny_dataset: np.ndarray) -> None:
    config = RunConfig(model=TINY_CONFIG)
    assert config.stage2.freeze_encoder
    with pytest.raises(AppError, match="frozen encoder"):
        run_stage2(config, tiny_dataset)


def test_stage2_rejects_other_architecture(tiny_dataset: np.ndarray) -> None:
    config = RunConfig(model=TINY_CONFIG)
    other = init_params(TINY_CONFIG.frozen_patch({"encoder_dim": 32}), seed=0)
    with pytest.raises(ConfigError, match="different architecture"):
        run_stage2(config, tiny_dataset, init=other)


def test_stage2_leaves_init_alone(tiny_dataset: np.ndarray) -> None:
    config = load_preset("smoke")
    stage1 = run_pretrain(config, tiny_dataset)
    before = stage1.checksum("")
    stage2 = run_stage2(config, tiny_dataset, init=stage1)
    assert stage1.checksum("") == before
    assert stage2.checksum("encoder.") == stage1.checksum("encoder.")
    assert stage2.checksum("head_m.") != stage1.checksum("head_m.")


def test_pretrain_is_seeded(tiny_dataset: np.ndarray) -> None:
    config = load_preset("smoke")
    first = run_pretrain(config, tiny_dataset)
    assert run_pretrain(config, tiny_dataset).checksum("") == first.checksum("")
    reseeded = config.frozen_patch({"seed": 1})
    assert run_pretrain(reseeded, tiny_dataset).checksum("") != first.checksum("")


def test_evaluate_corpus_errors(tiny_params: ModelParams) -> None:
    options = ScoreOptions()
    images = random_images(2)

    async def evaluate(corpus: Corpus) -> None:
        await evaluate_corpus(tiny_params, corpus, "fusion", options, seed=0)

    with pytest.raises(DatasetError, match="no test images"):
        anyio.run(evaluate, Corpus(name="empty", train=list(images)))
    large = random_images(1, size=32)[0]
    corpus = Corpus(
        name="large", test=[TestItem(name="good/000", image=large, anomalous=False)]
    )
    with pytest.raises(ConfigError, match="16-pixel"):
        anyio.run(evaluate, corpus)


def test_evaluate_corpus(tiny_params: ModelParams) -> None:
    images = random_images(4, seed=8)
    mask = np.zeros((16, 16), np.float32)
    mask[4:8, 4:8] = 1.0
    test = [
        TestItem(name="good/000", image=images[0], anomalous=False),
        TestItem(name="good/001", image=images[1], anomalous=False),
        TestItem(name="blob/000", image=images[2], anomalous=True, mask=mask),
        TestItem(name="blob/001", image=images[3], anomalous=True, mask=mask),
    ]

    async def main() -> float:
        report = await evaluate_corpus(
            tiny_params,
            Corpus(name="tiny", test=test),
            "fusion",
            ScoreOptions(),
            seed=0,
        )
        assert report.category == "tiny"
        assert (report.n_pos, report.n_neg) == (2, 2)
        assert report.n_pos_pixels == 32
        return report.image_auc

    assert 0.0 <= anyio.run(main) <= 1.0

import numpy as np
import pytest
from pydantic import ValidationError

from tadpole.augment import (
    ALL_OPS,
    AugmentedSample,
    CorruptionConfig,
    apply_op,
    corrupt,
    corrupt_blocks,
    corrupted_count,
    make_epoch_stream,
)
from tadpole.model import DatasetError

from ..conftest import random_images


def _check_sample(sample: AugmentedSample) -> None:
    label = sample.label
    assert label.shape == sample.original.shape[1:]
    assert set(np.unique(label).tolist()) <= {0.0, 1.0}
    untouched = label == 0.0
    np.testing.assert_array_equal(
        sample.corrupted[:, untouched], sample.original[:, untouched]
    )
    covered = np.zeros_like(label)
    for block in sample.blocks:
        covered[block.rows, block.cols] = 1.0
    np.testing.assert_array_equal(label, covered)
    assert sample.corrupted.min() >= 0.0
    assert sample.corrupted.max() <= 1.0
    assert sample.corrupted.dtype == sample.original.dtype


def test_labels_mark_exactly_the_changed_blocks() -> None:
    config = CorruptionConfig()
    rng = np.random.default_rng(0)
    images = random_images(40, size=32)
    for image in images:
        sample = corrupt_blocks(image, config, rng)
        _check_sample(sample)
        assert sample.is_corrupted
        assert len(sample.blocks) in config.block_count


def test_block_sizes_follow_the_config() -> None:
    config = CorruptionConfig(block_count=(3, 3), block_size=(0.25, 0.5))
    rng = np.random.default_rng(1)
    for image in random_images(20, size=32):
        sample = corrupt_blocks(image, config, rng)
        assert len(sample.blocks) == 3
        for block in sample.blocks:
            assert 8 <= block.height <= 16
            assert 8 <= block.width <= 16
            assert block.top + block.height <= 32
            assert block.left + block.width <= 32


def test_corrupt_probability() -> None:
    image = random_images(1)[0]
    rng = np.random.default_rng(0)
    never = CorruptionConfig(corrupt_probability=0.0)
    always = CorruptionConfig(corrupt_probability=1.0)
    clean = corrupt(image, never, rng)
    assert not clean.is_corrupted
    assert not clean.label.any()
    np.testing.assert_array_equal(clean.corrupted, image)
    assert corrupt(image, always, rng).label.any()


@pytest.mark.parametrize("op", ALL_OPS)
def test_every_op_keeps_the_shape(op: str) -> None:
    region = np.random.default_rng(0).uniform(size=(3, 4, 6))
    rng = np.random.default_rng(1)
    out = apply_op(op, region, CorruptionConfig(), rng)  # type: ignore[arg-type]
    assert out.shape == region.shape


def test_geometric_ops() -> None:
    region = np.arange(24, dtype=np.float64).reshape(2, 3, 4)
    rng = np.random.default_rng(0)
    config = CorruptionConfig()
    np.testing.assert_array_equal(
        apply_op("flip_h", region, config, rng), region[:, :, ::-1]
    )
    np.testing.assert_array_equal(
        apply_op("flip_v", region, config, rng), region[:, ::-1, :]
    )
    # A quarter turn of a non-square block falls back to a half turn
    np.testing.assert_array_equal(
        apply_op("rotate90", region, config, rng),
        apply_op("rotate180", region, config, rng),
    )
    shuffled = apply_op("channel_shuffle", region, config, rng)
    assert sorted(shuffled.reshape(2, -1).sum(axis=1)) == sorted(
        region.reshape(2, -1).sum(axis=1)
    )


def test_channel_shift_magnitude() -> None:
    region = np.full((3, 2, 2), 0.5)
    config = CorruptionConfig(shift_magnitude=(0.2, 0.3))
    shift = apply_op("channel_shift", region, config, np.random.default_rng(0)) - 0.5
    magnitude = np.abs(shift[:, 0, 0])
    assert ((magnitude >= 0.2) & (magnitude <= 0.3)).all()
    # One offset per channel
    np.testing.assert_allclose(shift, shift[:, :1, :1] * np.ones((1, 2, 2)))


@pytest.mark.parametrize(
    ("size", "expected"), [(1, 1), (6, 5), (12, 10), (60, 50), (7, 6)]
)
def test_corrupted_count(size: int, expected: int) -> None:
    assert corrupted_count(CorruptionConfig(), size) == expected


def test_epoch_stream() -> None:
    dataset = random_images(12)
    config = CorruptionConfig()
    stream = make_epoch_stream(dataset, config, 0, 42)
    assert sorted(sample.index for sample in stream) == list(range(12))
    assert sum(sample.is_corrupted for sample in stream) == 10
    for sample in stream:
        _check_sample(sample)
        np.testing.assert_array_equal(sample.original, dataset[sample.index])


def test_epoch_stream_is_deterministic() -> None:
    dataset = random_images(6)
    config = CorruptionConfig()
    first = make_epoch_stream(dataset, config, 3, 42)
    second = make_epoch_stream(dataset, config, 3, 42)
    for a, b in zip(first, second, strict=True):
        assert a.index == b.index
        assert a.blocks == b.blocks
        np.testing.assert_array_equal(a.corrupted, b.corrupted)
    other = make_epoch_stream(dataset, config, 4, 42)
    assert [s.blocks for s in other] != [s.blocks for s in first]


def test_epoch_stream_needs_images() -> None:
    with pytest.raises(DatasetError):
        make_epoch_stream([], CorruptionConfig(), 0, 0)


@pytest.mark.parametrize(
    "patch",
    [
        {"block_count": (0, 3)},
        {"block_count": (4, 2)},
        {"block_size": (0.0, 0.5)},
        {"block_size": (0.5, 1.5)},
        {"ops": ()},
        {"corrupt_probability": 1.5},
    ],
)
def test_config_errors(patch: dict[str, object]) -> None:
    with pytest.raises(ValidationError):
        CorruptionConfig.model_validate(patch)


def test_contract_holds_over_many_draws() -> None:
    config = CorruptionConfig()
    pool = random_images(16)
    rng = np.random.default_rng(11)
    for draw in range(10_000):
        sample = corrupt(pool[draw % len(pool)], config, rng)
        _check_sample(sample)
        changed = (sample.corrupted != sample.original).any(axis=0)
        assert not (changed & (sample.label == 0.0)).any()


def test_noise_changes_every_labelled_pixel() -> None:
    config = CorruptionConfig(ops=("gaussian_noise",), corrupt_probability=1.0)
    pool = random_images(8)
    rng = np.random.default_rng(12)
    for draw in range(2_000):
        sample = corrupt(pool[draw % len(pool)], config, rng)
        changed = (sample.corrupted != sample.original).any(axis=0)
        np.testing.assert_array_equal(changed, sample.label == 1.0)


def test_mean_label_area_lies_in_the_expected_band() -> None:
    config = CorruptionConfig()
    size = 16
    low, high = config.block_size.lower, config.block_size.upper
    # Expected side length, including the rounding and the one-pixel floor
    side = np.maximum(1, np.round(np.linspace(low, high, 100_001) * size)).mean()
    area = side**2 / size**2
    mean_count = (config.block_count.lower + config.block_count.upper) / 2
    p = config.corrupt_probability
    image = random_images(1, size=size)[0]
    rng = np.random.default_rng(13)
    fraction = np.mean(
        [corrupt(image, config, rng).label.mean() for _ in range(10_000)]
    )
    # One block at least, and no more than the sum of all block areas
    assert p * area < fraction < p * mean_count * area


def test_whole_image_flip_is_a_mirror() -> None:
    config = CorruptionConfig(
        block_count=(1, 1),
        block_size=(1.0, 1.0),
        ops=("flip_h",),
        stack_probability=0.0,
    )
    image = random_images(1)[0]
    sample = corrupt_blocks(image, config, np.random.default_rng(0))
    np.testing.assert_array_equal(sample.corrupted, image[:, :, ::-1])
    np.testing.assert_array_equal(sample.label, np.ones((16, 16)))

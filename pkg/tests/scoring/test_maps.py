import logging

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from tadpole.scoring import fuse, image_score, normalize, reconstruction_error, smooth
from tadpole.scoring import _maps as maps_module
from tadpole.tensor import ShapeError


def test_reconstruction_error_of_one_pixel() -> None:
    image = np.zeros((3, 1, 1))
    image[0] = 1.0
    error = reconstruction_error(image, np.zeros((3, 1, 1)))
    assert error.tolist() == [[pytest.approx(1.0 / 3.0)]]


def test_reconstruction_error_matches_a_loop() -> None:
    rng = np.random.default_rng(0)
    image, recon = rng.uniform(size=(2, 3, 5, 7))
    error = reconstruction_error(image, recon)
    for i in range(5):
        for j in range(7):
            expected = sum((image[c, i, j] - recon[c, i, j]) ** 2 for c in range(3))
            assert error[i, j] == pytest.approx(expected / 3, abs=1e-6)
    np.testing.assert_array_equal(reconstruction_error(image, image), 0.0)


def test_other_channel_counts_are_logged_once(caplog: pytest.LogCaptureFixture) -> None:
    maps_module._note_channel_mean.cache_clear()
    with caplog.at_level(logging.DEBUG, logger="tadpole.scoring"):
        gray = reconstruction_error(np.ones((1, 2, 2)), np.zeros((1, 2, 2)))
        reconstruction_error(np.ones((1, 2, 2)), np.zeros((1, 2, 2)))
        reconstruction_error(np.ones((3, 2, 2)), np.zeros((3, 2, 2)))
    np.testing.assert_array_equal(gray, 1.0)
    messages = [r.getMessage() for r in caplog.records if "channels" in r.getMessage()]
    assert messages == ["Averaging the reconstruction error over 1 channels"]


def test_reconstruction_error_needs_matching_images() -> None:
    with pytest.raises(ShapeError):
        reconstruction_error(np.zeros((3, 4, 4)), np.zeros((3, 4, 5)))
    with pytest.raises(ShapeError):
        reconstruction_error(np.zeros((4, 4)), np.zeros((4, 4)))


def test_fuse() -> None:
    error = np.array([[1.0, 2.0], [3.0, 4.0]])
    fused = fuse(error, np.full((2, 2), 0.5))
    assert fused.tolist() == [[0.5, 1.0], [1.5, 2.0]]
    np.testing.assert_array_equal(fuse(error, np.zeros((2, 2))), 0.0)
    np.testing.assert_array_equal(fuse(error, np.ones((2, 2))), error)
    with pytest.raises(ShapeError):
        fuse(error, np.ones((2, 3)))


def test_image_score() -> None:
    assert image_score(np.array([[1.0, 2.0], [3.0, 4.0]])) == 2.5
    assert image_score(np.zeros((4, 4))) == 0.0
    assert image_score(np.array([[1.0, 2.0], [3.0, 4.0]]), "max") == 4.0
    values = np.random.default_rng(0).uniform(size=(64, 64))
    naive = 0.0
    for value in values.reshape(-1):
        naive += value
    assert image_score(values) == pytest.approx(naive / values.size, abs=1e-7)


@given(
    score=arrays(np.float64, (4, 4), elements=st.floats(0.0, 1.0)),
    index=st.integers(0, 15),
    bump=st.floats(0.0, 10.0),
)
def test_image_score_is_monotone(score: np.ndarray, index: int, bump: float) -> None:
    probability = np.full((4, 4), 0.3)
    raised = score.copy()
    raised.reshape(-1)[index] += bump
    assert image_score(fuse(raised, probability)) >= image_score(
        fuse(score, probability)
    )


def test_normalize() -> None:
    score = np.array([[1.0, 3.0], [2.0, 5.0]])
    assert normalize(score, "none") is score
    np.testing.assert_allclose(normalize(score, "minmax"), [[0.0, 0.5], [0.25, 1.0]])
    np.testing.assert_array_equal(normalize(np.full((2, 2), 7.0), "minmax"), 0.0)


def test_smooth() -> None:
    np.testing.assert_allclose(smooth(np.full((8, 8), 0.2), 1.0), 0.2)
    spike = np.zeros((9, 9))
    spike[4, 4] = 1.0
    blurred = smooth(spike, 1.0)
    assert blurred.sum() == pytest.approx(1.0)
    assert blurred[4, 4] < 1.0
    assert blurred[4, 4] == blurred.max()
    # The window shrinks to fit small maps
    assert smooth(np.ones((4, 4)), 4.0).shape == (4, 4)

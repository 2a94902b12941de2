import numpy as np
import pytest
from pydantic import ValidationError

from tadpole.nn import (
    BUFFER_NAMES,
    ModelConfig,
    ModelParams,
    decode,
    encode,
    forward_full,
    head_classify,
    head_reconstruct,
    image_patches,
    init_params,
)
from tadpole.nn import _model as model_module
from tadpole.pretrain import masked_reconstruction_loss
from tadpole.tensor import ShapeError, Tensor, TokenIndexError

from ..conftest import TINY_CONFIG, random_images


def test_config_properties(tiny_config: ModelConfig) -> None:
    assert tiny_config.grid_size == 4
    assert tiny_config.num_tokens == 16
    assert tiny_config.patch_dim == 48
    assert tiny_config.num_masked == 12
    assert tiny_config.hidden_dim(16) == 32


@pytest.mark.parametrize(
    ("patch", "match"),
    [
        ({"patch_size": 5}, "not divisible by patch_size"),
        ({"encoder_heads": 3}, "heads"),
        ({"decoder_dim": 18, "decoder_heads": 2}, "divisible by 4"),
        ({"mask_ratio": 0.05}, "at least one masked"),
    ],
)
def test_config_errors(patch: dict[str, object], match: str) -> None:
    with pytest.raises(ValidationError, match=match):
        TINY_CONFIG.frozen_patch(patch)


def test_init_is_reproducible() -> None:
    first = init_params(TINY_CONFIG, seed=3)
    assert first.checksum() == init_params(TINY_CONFIG, seed=3).checksum()
    assert first.checksum() != init_params(TINY_CONFIG, seed=4).checksum()
    # Fixed position codes do not depend on the seed
    assert (
        first.checksum("encoder.pos_embed")
        == init_params(TINY_CONFIG, seed=4).checksum("encoder.pos_embed")
    )


def test_parameter_groups(tiny_params: ModelParams) -> None:
    names = tiny_params.parameter_names()
    assert not set(BUFFER_NAMES) & set(names)
    assert set(BUFFER_NAMES) <= set(tiny_params)
    assert all(name.startswith("encoder.") for name in tiny_params.encoder_names())
    no_decay = tiny_params.no_decay_names()
    assert "decoder.mask_token" in no_decay
    assert "head_m.bias" in no_decay
    assert "head_m.weight" not in no_decay
    assert tiny_params["head_m.weight"].shape == (16, 16)
    assert tiny_params["head_r.weight"].shape == (16, 48)


def test_copy_is_independent(tiny_params: ModelParams) -> None:
    clone = tiny_params.copy()
    before = tiny_params.checksum()
    clone["head_r.bias"].data += 1.0
    assert tiny_params.checksum() == before
    assert clone.checksum() != before
    assert clone.config == tiny_params.config


def test_set_trainable(tiny_params: ModelParams) -> None:
    tiny_params.set_trainable(["head_m.weight", "encoder.pos_embed"])
    trainable = {name for name, t in tiny_params.items() if t.requires_grad}
    assert trainable == {"head_m.weight"}
    with pytest.raises(KeyError, match="nope"):
        tiny_params.set_trainable(["nope"])


def test_load_arrays(tiny_params: ModelParams) -> None:
    other = init_params(TINY_CONFIG, seed=9)
    tiny_params.load_arrays(other.arrays())
    assert tiny_params.checksum() == other.checksum()
    arrays = other.arrays()
    del arrays["head_m.bias"]
    with pytest.raises(KeyError, match="head_m.bias"):
        tiny_params.load_arrays(arrays)
    arrays = other.arrays()
    arrays["head_m.bias"] = np.zeros(3, dtype=np.float32)
    with pytest.raises(ValueError, match="head_m.bias"):
        tiny_params.load_arrays(arrays)


def test_forward_full_shapes(tiny_params: ModelParams) -> None:
    image = random_images(1)[0]
    outputs = forward_full(
        tiny_params, image, heads=("reconstruct", "logits", "probability")
    )
    assert outputs["reconstruct"].shape == (3, 16, 16)
    assert outputs["logits"].shape == (16, 16)
    probability = outputs["probability"].data
    assert ((probability >= 0.0) & (probability <= 1.0)).all()
    with pytest.raises(ValueError, match="Unknown head"):
        forward_full(tiny_params, image, heads=("depth",))
    with pytest.raises(ShapeError):
        forward_full(tiny_params, random_images(1, size=8)[0])


def test_token_order_does_not_matter(tiny_params: ModelParams) -> None:
    patches = image_patches(tiny_params, random_images(1)[0])
    positions = np.array([1, 4, 7, 12])
    order = np.array([2, 0, 3, 1])
    rows = patches.data[positions]
    encoded = encode(tiny_params, Tensor(rows), positions)
    shuffled = encode(tiny_params, Tensor(rows[order]), positions[order])
    np.testing.assert_allclose(shuffled.data, encoded.data[order], atol=1e-5)
    decoded = decode(tiny_params, encoded, positions)
    decoded_shuffled = decode(tiny_params, shuffled, positions[order])
    assert decoded.shape == (16, 16)
    np.testing.assert_allclose(decoded_shuffled.data, decoded.data, atol=1e-5)


def test_position_errors(tiny_params: ModelParams) -> None:
    patches = image_patches(tiny_params, random_images(1)[0])
    with pytest.raises(TokenIndexError, match="distinct"):
        encode(tiny_params, Tensor(patches.data[:2]), [3, 3])
    with pytest.raises(TokenIndexError):
        encode(tiny_params, Tensor(patches.data[:2]), [3, 16])
    with pytest.raises(ShapeError):
        encode(tiny_params, Tensor(patches.data[:3]), [0, 1])
    with pytest.raises(ShapeError):
        encode(tiny_params, Tensor(patches.data[:0]), [])



def test_heads_on_a_zero_decoder_output(tiny_params: ModelParams) -> None:
    dec_out = Tensor(np.zeros((16, 16)))
    image = head_reconstruct(tiny_params, dec_out)
    assert image.shape == (3, 16, 16)
    np.testing.assert_array_equal(image.data, 0.0)
    np.testing.assert_array_equal(head_classify(tiny_params, dec_out).data, 0.5)
    tiny_params["head_m.bias"].data[:] = -100.0
    assert head_classify(tiny_params, dec_out).data.max() < 1e-6


def test_decode_inserts_mask_tokens(tiny_params: ModelParams) -> None:
    patches = image_patches(tiny_params, random_images(1)[0])
    everything = np.arange(16)
    full = decode(tiny_params, encode(tiny_params, patches, everything), everything)
    token = tiny_params["decoder.mask_token"]
    token.data = token.data + 1.0
    # Nothing is masked, so the mask token plays no part
    again = decode(tiny_params, encode(tiny_params, patches, everything), everything)
    np.testing.assert_array_equal(full.data, again.data)
    partial = np.arange(15)
    encoded = encode(tiny_params, Tensor(patches.data[:15]), partial)
    before = decode(tiny_params, encoded, partial).data
    token.data = token.data - 1.0
    after = decode(tiny_params, encoded, partial).data
    assert not np.array_equal(before, after)


def test_only_visible_tokens_enter_the_encoder(
    tiny_params: ModelParams, monkeypatch: pytest.MonkeyPatch
) -> None:
    seen: list[tuple[str, tuple[int, ...]]] = []
    original_block = model_module.block

    def recording_block(
        params: ModelParams, prefix: str, x: Tensor, heads: int
    ) -> Tensor:
        seen.append((prefix, x.shape))
        return original_block(params, prefix, x, heads)

    monkeypatch.setattr(model_module, "block", recording_block)
    config = tiny_params.config
    image = random_images(1)[0]
    masked_reconstruction_loss(tiny_params, image, np.random.default_rng(4))
    encoder = [shape for prefix, shape in seen if prefix.startswith("encoder.")]
    decoder = [shape for prefix, shape in seen if prefix.startswith("decoder.")]
    visible = config.num_tokens - config.num_masked
    assert encoder == [(visible, config.encoder_dim)] * config.encoder_depth
    assert decoder == [(config.num_tokens, config.decoder_dim)] * config.decoder_depth

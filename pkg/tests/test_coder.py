import pytest
import torch

from avtse.errors import ConfigurationError, InvalidInputError
from avtse.model.coder import ConvDecoder, ConvEncoder

from conftest import tiny_config


def test_frame_count_3s_16k():
    cfg = tiny_config(sample_rate=16000)
    assert cfg.kernel_samples == 32 and cfg.stride_samples == 16
    assert cfg.n_frames(48000) == 2999


def test_frame_count_half_second_8k():
    cfg = tiny_config(sample_rate=8000)
    assert cfg.kernel_samples == 16 and cfg.stride_samples == 8
    assert cfg.n_frames(4000) == 499


def test_encoder_output_shape():
    enc = ConvEncoder(8, 16, 8)
    out = enc(torch.randn(3, 4000))
    assert out.shape == (3, 8, 499)


def test_encoder_rejects_short_input():
    enc = ConvEncoder(8, 16, 8)
    with pytest.raises(InvalidInputError):
        enc(torch.randn(1, 15))
    with pytest.raises(ConfigurationError):
        tiny_config().n_frames(10)


def test_zero_input_zero_bias_gives_zero_map():
    enc = ConvEncoder(8, 16, 8)
    with torch.no_grad():
        enc.conv.bias.zero_()
    out = enc(torch.zeros(1, 400))
    assert torch.equal(out, torch.zeros_like(out))


def test_decoder_raw_length():
    dec = ConvDecoder(8, 32, 16)
    out = dec(torch.randn(1, 8, 2999))
    assert out.shape == (1, 48000)  # (2999 - 1) * 16 + 32


def test_zero_features_zero_bias_decode_to_silence():
    dec = ConvDecoder(8, 16, 8)
    with torch.no_grad():
        dec.deconv.bias.zero_()
    out = dec(torch.zeros(2, 8, 10))
    assert torch.equal(out, torch.zeros_like(out))


@pytest.mark.parametrize("n_samples", [328, 4000, 5000])
def test_roundtrip_preserves_length_after_trim(n_samples):
    enc = ConvEncoder(8, 16, 8)
    dec = ConvDecoder(8, 16, 8)
    x = torch.randn(2, n_samples)
    out = dec(enc(x), trim_to=n_samples)
    assert out.shape == x.shape

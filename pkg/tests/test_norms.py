import numpy as np
import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

from avtse.errors import ConfigurationError
from avtse.model.norms import ChannelNorm, ChunkNorm, normalize

KINDS = ("gLN", "cLN", "LN")


def rand_map(b=2, n=6, t=17, seed=0, dtype=torch.float64):
    g = torch.Generator().manual_seed(seed)
    return torch.randn(b, n, t, generator=g, dtype=dtype)


@pytest.mark.parametrize("kind", KINDS)
def test_constant_input_collapses_to_zero(kind):
    c = 3.7
    x = torch.full((1, 5, 12), c, dtype=torch.float64)
    out = normalize(x, kind)
    # zero variance: numerator cancels, bounded by c / sqrt(eps)
    assert out.abs().max() <= c / np.sqrt(1e-8)
    assert out.abs().max() < 1e-3


@pytest.mark.parametrize("kind", KINDS)
def test_affine_applies_per_channel(kind):
    x = rand_map()
    w = torch.arange(1.0, 7.0, dtype=torch.float64)
    b = torch.arange(0.0, 0.6, 0.1, dtype=torch.float64)
    got = normalize(x, kind, w, b)
    plain = normalize(x, kind)
    want = plain * w.view(1, -1, 1) + b.view(1, -1, 1)
    assert torch.allclose(got, want)


def test_cln_frame_one_equals_ln_frame_one():
    x = rand_map(seed=3)
    cln = normalize(x, "cLN")
    ln = normalize(x, "LN")
    assert torch.allclose(cln[:, :, 0], ln[:, :, 0], atol=1e-7)


def test_gln_permutation_equivariance():
    x = rand_map(seed=4)
    perm = torch.randperm(x.shape[2], generator=torch.Generator().manual_seed(9))
    out_then_perm = normalize(x, "gLN")[:, :, perm]
    perm_then_out = normalize(x[:, :, perm], "gLN")
    assert torch.allclose(out_then_perm, perm_then_out, atol=1e-7)


def test_cln_not_permutation_equivariant():
    x = rand_map(seed=5)
    perm = torch.roll(torch.arange(x.shape[2]), 1)
    out_then_perm = normalize(x, "cLN")[:, :, perm]
    perm_then_out = normalize(x[:, :, perm], "cLN")
    assert not torch.allclose(out_then_perm, perm_then_out, atol=1e-5)


def test_cln_is_causal():
    x = rand_map(seed=6)
    y = x.clone()
    y[:, :, 10:] += 5.0
    a = normalize(x, "cLN")
    b = normalize(y, "cLN")
    assert torch.allclose(a[:, :, :10], b[:, :, :10])
    assert not torch.allclose(a[:, :, 10:], b[:, :, 10:], atol=1e-3)


def test_unknown_kind_rejected():
    with pytest.raises(ConfigurationError):
        normalize(rand_map(), "BN")
    with pytest.raises(ConfigurationError):
        ChannelNorm("foo", 4)


def test_two_dim_input_accepted():
    x = rand_map()[0]
    out = normalize(x, "LN")
    assert out.shape == x.shape


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 9999), kind=st.sampled_from(KINDS))
def test_normalized_statistics(seed, kind):
    x = rand_map(seed=seed, t=23)
    out = normalize(x, kind)
    if kind == "gLN":
        assert float(out.mean(dim=(1, 2)).abs().max()) < 1e-6
        assert float((out.var(dim=(1, 2), unbiased=False) - 1).abs().max()) < 1e-4
    elif kind == "LN":
        assert float(out.mean(dim=1).abs().max()) < 1e-6
    else:  # cLN: last frame statistics match gLN over the full map
        full = normalize(x, "gLN")
        assert torch.allclose(out[:, :, -1], full[:, :, -1], atol=1e-6)


@pytest.mark.parametrize("kind", KINDS)
def test_chunknorm_matches_flat_norms_where_defined(kind):
    # gLN over (N, K, S) equals normalize over the flattened frame axis
    g = torch.Generator().manual_seed(11)
    x = torch.randn(2, 4, 6, 5, generator=g, dtype=torch.float64)
    norm = ChunkNorm(kind, 4).double()
    out = norm(x)
    assert out.shape == x.shape
    if kind == "gLN":
        flat = normalize(x.reshape(2, 4, 30), "gLN").reshape(2, 4, 6, 5)
        assert torch.allclose(out, flat, atol=1e-10)
    if kind == "LN":
        flat = normalize(x.reshape(2, 4, 30), "LN").reshape(2, 4, 6, 5)
        assert torch.allclose(out, flat, atol=1e-10)


def test_chunknorm_cln_cumulates_over_chunk_axis():
    g = torch.Generator().manual_seed(12)
    x = torch.randn(1, 3, 4, 6, generator=g, dtype=torch.float64)
    out = ChunkNorm("cLN", 3).double()(x)
    y = x.clone()
    y[:, :, :, 3:] += 2.0  # later chunks only
    out_y = ChunkNorm("cLN", 3).double()(y)
    assert torch.allclose(out[:, :, :, :3], out_y[:, :, :, :3])


def test_chunknorm_streaming_moments_match_batch():
    g = torch.Generator().manual_seed(13)
    x = torch.randn(2, 3, 4, 8, generator=g, dtype=torch.float64)
    norm = ChunkNorm("cLN", 3).double()
    full = norm(x)
    first, second = x[:, :, :, :5], x[:, :, :, 5:]
    out1 = norm(first)
    moments = norm.updated_moments(first)
    out2 = norm(second, moments)
    assert torch.allclose(torch.cat([out1, out2], dim=3), full, atol=1e-10)

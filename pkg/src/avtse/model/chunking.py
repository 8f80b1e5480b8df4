"""Segmentation of feature maps into half-overlapping chunks and the inverse.

Chunks of length K are taken at hop P = K // 2 starting at frame 0; the time
axis is zero-padded at the end so the last chunk is complete.  Overlap-add
divides by the per-frame contribution count, so segment followed by
overlap_add is the identity.
"""

from __future__ import annotations

import torch

from ..errors import InvalidInputError


def hop_size(chunk_size: int) -> int:
    return max(1, chunk_size // 2)


def chunk_count(n_frames: int, chunk_size: int) -> int:
    """Number of chunks covering ``n_frames`` frames (after padding)."""
    if n_frames <= chunk_size:
        return 1
    p = hop_size(chunk_size)
    return -(-(n_frames - chunk_size) // p) + 1  # ceil div


def segment(x, chunk_size):
    """[B, N, T] -> ([B, N, K, S], T) with 50% chunk overlap."""
    if x.dim() != 3:
        raise InvalidInputError(f"segment expects [B, N, T], got {tuple(x.shape)}")
    B, N, T = x.shape
    p = hop_size(chunk_size)
    s = chunk_count(T, chunk_size)
    padded = (s - 1) * p + chunk_size
    if padded > T:
        x = torch.nn.functional.pad(x, (0, padded - T))
    # unfold along time: [B, N, S, K] -> [B, N, K, S]
    chunks = x.unfold(2, chunk_size, p).permute(0, 1, 3, 2).contiguous()
    return chunks, T


def overlap_add(chunks, n_frames):
    """[B, N, K, S] -> [B, N, n_frames], count-normalized overlap-add."""
    if chunks.dim() != 4:
        raise InvalidInputError(f"overlap_add expects [B, N, K, S], got {tuple(chunks.shape)}")
    B, N, K, S = chunks.shape
    p = hop_size(K)
    padded = (S - 1) * p + K
    # fold treats input as [B, C*K, S] patches over a 1 x padded output
    folded = torch.nn.functional.fold(
        chunks.reshape(B, N * K, S),
        output_size=(1, padded),
        kernel_size=(1, K),
        stride=(1, p),
    ).reshape(B, N, padded)
    ones = torch.ones(1, 1, K, S, dtype=chunks.dtype, device=chunks.device)
    counts = torch.nn.functional.fold(
        ones.reshape(1, K, S),
        output_size=(1, padded),
        kernel_size=(1, K),
        stride=(1, p),
    ).reshape(1, 1, padded)
    return (folded / counts)[:, :, :n_frames]

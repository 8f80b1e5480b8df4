"""Normalization layers: global (gLN), cumulative (cLN) and per-frame (LN).

All three share the same per-channel affine transform and differ only in the
window the statistics are computed over:

* gLN  - mean/variance over all channels and all frames jointly,
* cLN  - at frame t, mean/variance over channels and frames 1..t,
* LN   - per frame, mean/variance over channels only.

``normalize`` operates on (N, T) / (B, N, T) feature maps; ``ChunkNorm``
applies the same kinds to the chunked (B, N, K, S) tensors inside the
dual-path layers, with cLN cumulating along the chunk axis S so causal
configurations never peek at future chunks.
"""

from __future__ import annotations

import torch
import torch.nn as nn

from ..errors import ConfigurationError
from .config import NORM_KINDS

EPS = 1e-8


def _affine(x, weight, bias):
    # weight/bias are per-channel; x has channels on dim 1
    if weight is None:
        return x
    shape = [1, -1] + [1] * (x.dim() - 2)
    return x * weight.view(*shape) + bias.view(*shape)


def normalize(x, kind, weight=None, bias=None, eps=EPS):
    """Normalize a feature map of shape (N, T) or (B, N, T).

    Args:
        x: input tensor, channels-first.
        kind: one of ``gLN``, ``cLN``, ``LN``.
        weight, bias: optional per-channel affine parameters of length N.
        eps: variance floor.

    Returns:
        Tensor of the same shape.
    """
    if eps <= 0:
        raise ConfigurationError(f"epsilon must be positive, got {eps}")
    if kind not in NORM_KINDS:
        raise ConfigurationError(f"unknown normalization kind {kind!r}; expected one of {NORM_KINDS}")
    squeeze = x.dim() == 2
    if squeeze:
        x = x.unsqueeze(0)
    if x.dim() != 3:
        raise ConfigurationError(f"normalize expects a 2-D or 3-D tensor, got {x.dim()}-D")

    if kind == "gLN":
        mean = x.mean(dim=(1, 2), keepdim=True)
        var = ((x - mean) ** 2).mean(dim=(1, 2), keepdim=True)
        out = (x - mean) / torch.sqrt(var + eps)
    elif kind == "LN":
        mean = x.mean(dim=1, keepdim=True)
        var = ((x - mean) ** 2).mean(dim=1, keepdim=True)
        out = (x - mean) / torch.sqrt(var + eps)
    else:  # cLN
        n_channels = x.shape[1]
        step_sum = x.sum(dim=1)  # [B, T]
        step_sq_sum = (x**2).sum(dim=1)  # [B, T]
        cum_sum = torch.cumsum(step_sum, dim=1)
        cum_sq_sum = torch.cumsum(step_sq_sum, dim=1)
        count = torch.arange(
            1, x.shape[2] + 1, device=x.device, dtype=x.dtype
        ) * n_channels  # entries per cumulative window
        cum_mean = cum_sum / count
        cum_var = cum_sq_sum / count - cum_mean**2
        cum_var = torch.clamp(cum_var, min=0.0)
        out = (x - cum_mean.unsqueeze(1)) / torch.sqrt(cum_var.unsqueeze(1) + eps)

    out = _affine(out, weight, bias)
    return out.squeeze(0) if squeeze else out


class ChannelNorm(nn.Module):
    """Learnable-affine wrapper around :func:`normalize` for (B, N, T) maps."""

    def __init__(self, kind, n_channels, eps=EPS):
        super().__init__()
        if kind not in NORM_KINDS:
            raise ConfigurationError(f"unknown normalization kind {kind!r}")
        self.kind = kind
        self.eps = eps
        self.weight = nn.Parameter(torch.ones(n_channels))
        self.bias = nn.Parameter(torch.zeros(n_channels))

    def forward(self, x):
        return normalize(x, self.kind, self.weight, self.bias, self.eps)

    def extra_repr(self):
        return f"kind={self.kind}, n_channels={self.weight.numel()}"


class ChunkNorm(nn.Module):
    """Normalization over chunked tensors of shape (B, N, K, S).

    gLN aggregates over (N, K, S); LN over N per (k, s) position; cLN
    cumulates along the chunk axis S with per-step statistics over (N, K),
    optionally continuing from carried streaming moments.
    """

    def __init__(self, kind, n_channels, eps=EPS):
        super().__init__()
        if kind not in NORM_KINDS:
            raise ConfigurationError(f"unknown normalization kind {kind!r}")
        self.kind = kind
        self.eps = eps
        self.weight = nn.Parameter(torch.ones(n_channels))
        self.bias = nn.Parameter(torch.zeros(n_channels))

    def forward(self, x, moments=None):
        if x.dim() != 4:
            raise ConfigurationError(f"ChunkNorm expects a 4-D tensor, got {x.dim()}-D")
        if self.kind == "gLN":
            mean = x.mean(dim=(1, 2, 3), keepdim=True)
            var = ((x - mean) ** 2).mean(dim=(1, 2, 3), keepdim=True)
            out = (x - mean) / torch.sqrt(var + self.eps)
        elif self.kind == "LN":
            mean = x.mean(dim=1, keepdim=True)
            var = ((x - mean) ** 2).mean(dim=1, keepdim=True)
            out = (x - mean) / torch.sqrt(var + self.eps)
        else:
            out = self._cumulative(x, moments)
        return _affine(out, self.weight, self.bias)

    def _cumulative(self, x, moments):
        B, N, K, S = x.shape
        step_sum = x.sum(dim=(1, 2))  # [B, S]
        step_sq_sum = (x**2).sum(dim=(1, 2))  # [B, S]
        cum_sum = torch.cumsum(step_sum, dim=1)
        cum_sq_sum = torch.cumsum(step_sq_sum, dim=1)
        count = torch.arange(1, S + 1, device=x.device, dtype=x.dtype) * (N * K)
        if moments is not None:
            prev_count, prev_sum, prev_sq_sum = moments["count"], moments["sum"], moments["sq_sum"]
            cum_sum = cum_sum + prev_sum.unsqueeze(1)
            cum_sq_sum = cum_sq_sum + prev_sq_sum.unsqueeze(1)
            count = count.unsqueeze(0) + prev_count.unsqueeze(1)
        mean = (cum_sum / count).view(B, 1, 1, S)
        var = (cum_sq_sum / count).view(B, 1, 1, S) - mean**2
        var = torch.clamp(var, min=0.0)
        return (x - mean) / torch.sqrt(var + self.eps)

    def updated_moments(self, x, moments=None):
        """Running (count, sum, sq_sum) after consuming ``x``, for streaming."""
        B, N, K, S = x.shape
        total_sum = x.sum(dim=(1, 2, 3))
        total_sq_sum = (x**2).sum(dim=(1, 2, 3))
        count = torch.full((B,), float(N * K * S), device=x.device, dtype=x.dtype)
        if moments is not None:
            count = count + moments["count"]
            total_sum = total_sum + moments["sum"]
            total_sq_sum = total_sq_sum + moments["sq_sum"]
        return {"count": count, "sum": total_sum, "sq_sum": total_sq_sum}

    def extra_repr(self):
        return f"kind={self.kind}, n_channels={self.weight.numel()}"

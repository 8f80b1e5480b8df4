"""Clue networks deriving speaker embeddings from the auxiliary streams."""

from __future__ import annotations

import torch.nn as nn
import torch.nn.functional as F

from ..errors import InvalidInputError
from .coder import ConvEncoder
from .dprnn import DPRNNStack


class AudioClueNet(nn.Module):
    """Enrolment waveform -> time-invariant embedding [B, N].

    Own time-feature encoder (parameters not shared with the mixture
    encoder), a dual-path stack at the feature rate, then temporal
    averaging; accepts any enrolment duration of at least one kernel.
    """

    def __init__(self, config):
        super().__init__()
        self.encoder = ConvEncoder(
            config.n_channels, config.kernel_samples, config.stride_samples
        )
        self.net = DPRNNStack(
            config.n_channels,
            config.hidden_dim,
            config.chunk_size,
            config.layers_per_block,
            config.norm_kind,
            config.causal,
        )

    def forward(self, enrolment):
        """[B, T_a] samples -> [B, N]."""
        feats = self.encoder(enrolment)  # [B, N, T_enr]
        feats = self.net(feats)
        return feats.mean(dim=2)


class VideoClueNet(nn.Module):
    """Visual feature stream -> per-frame embedding matched to T_M.

    A 1x1 convolution projects the D_v input features to N channels, a
    dual-path stack processes them at the video rate, and linear
    interpolation along time resamples to the requested frame count
    (endpoints map to endpoints).
    """

    def __init__(self, config):
        super().__init__()
        self.proj = nn.Conv1d(config.visual_feature_dim, config.n_channels, kernel_size=1)
        self.net = DPRNNStack(
            config.n_channels,
            config.hidden_dim,
            config.chunk_size,
            config.layers_per_block,
            config.norm_kind,
            config.causal,
        )

    def forward(self, video, target_frames):
        """[B, T_v, D_v] features -> [B, N, target_frames]."""
        if target_frames < 1:
            raise InvalidInputError(f"target frame count must be >= 1, got {target_frames}")
        if video.dim() != 3:
            raise InvalidInputError(f"video must be [B, T_v, D_v], got {tuple(video.shape)}")
        x = self.proj(video.transpose(1, 2))  # [B, N, T_v]
        x = self.net(x)
        if x.shape[2] == target_frames:
            return x
        if x.shape[2] == 1:
            return x.expand(-1, -1, target_frames).contiguous()
        return F.interpolate(x, size=target_frames, mode="linear", align_corners=True)

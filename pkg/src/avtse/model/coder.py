"""Learned time-feature encoder and decoder (1-D conv / transpose conv)."""

from __future__ import annotations

import torch.nn as nn
import torch.nn.functional as F

from ..errors import InvalidInputError


class ConvEncoder(nn.Module):
    """Waveform -> feature map via a strided 1-D convolution plus rectifier.

    Input  [B, T] samples, output [B, N, T_M] with
    T_M = floor((T - kernel) / stride) + 1 (no padding).
    """

    def __init__(self, n_channels, kernel_samples, stride_samples):
        super().__init__()
        self.kernel_samples = kernel_samples
        self.stride_samples = stride_samples
        self.conv = nn.Conv1d(1, n_channels, kernel_samples, stride=stride_samples)

    def forward(self, wave):
        if wave.dim() != 2:
            raise InvalidInputError(f"encoder expects [B, T], got {tuple(wave.shape)}")
        if wave.shape[1] < self.kernel_samples:
            raise InvalidInputError(
                f"input of {wave.shape[1]} samples is shorter than one kernel ({self.kernel_samples})"
            )
        x = self.conv(wave.unsqueeze(1))  # [B, N, T_M]
        return F.relu(x)


class ConvDecoder(nn.Module):
    """Feature map -> waveform via a 1-D transpose convolution.

    Raw output length is (T_M - 1) * stride + kernel; callers trim to the
    original mixture length.
    """

    def __init__(self, n_channels, kernel_samples, stride_samples):
        super().__init__()
        self.kernel_samples = kernel_samples
        self.stride_samples = stride_samples
        self.deconv = nn.ConvTranspose1d(n_channels, 1, kernel_samples, stride=stride_samples)

    def forward(self, features, trim_to=None):
        if features.dim() != 3:
            raise InvalidInputError(f"decoder expects [B, N, T_M], got {tuple(features.shape)}")
        wave = self.deconv(features).squeeze(1)  # [B, T_raw]
        if trim_to is not None:
            if wave.shape[1] < trim_to:
                wave = F.pad(wave, (0, trim_to - wave.shape[1]))
            else:
                wave = wave[:, :trim_to]
        return wave

"""Model hyperparameter container and validation."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, asdict

from ..errors import ConfigurationError

NORM_KINDS = ("gLN", "cLN", "LN")


@dataclass
class ModelConfig:
    """Geometry and architectural switches of the extraction network.

    The encoder/decoder kernel and stride are given in milliseconds and
    resolved against ``sample_rate``.  ``causal=True`` switches the
    inter-chunk recurrences to uni-directional and forbids gLN (its
    statistics aggregate over the full time axis).
    """

    causal: bool = False
    norm_kind: str = "gLN"
    n_channels: int = 256
    hidden_dim: int = 128
    chunk_size: int = 100
    layers_per_block: int = 2
    encoder_kernel_ms: float = 2.0
    encoder_stride_ms: float = 1.0
    visual_feature_dim: int = 512
    mask_activation: str = "sigmoid"
    sample_rate: int = 16000

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.norm_kind not in NORM_KINDS:
            raise ConfigurationError(
                f"unknown norm_kind {self.norm_kind!r}; expected one of {NORM_KINDS}"
            )
        if self.causal and self.norm_kind == "gLN":
            raise ConfigurationError("causal=True forbids gLN (global time statistics)")
        if not self.causal and self.norm_kind == "cLN":
            warnings.warn(
                "cLN with causal=False is unconventional (cLN exists for causal use)",
                stacklevel=2,
            )
        for name in (
            "n_channels",
            "hidden_dim",
            "chunk_size",
            "layers_per_block",
            "visual_feature_dim",
            "sample_rate",
        ):
            value = getattr(self, name)
            if value <= 0:
                raise ConfigurationError(f"{name} must be positive, got {value}")
        if self.encoder_kernel_ms <= 0 or self.encoder_stride_ms <= 0:
            raise ConfigurationError("encoder kernel/stride must be positive")
        if self.mask_activation != "sigmoid":
            raise ConfigurationError(
                f"mask_activation {self.mask_activation!r} is not supported (use 'sigmoid')"
            )
        if self.kernel_samples < 1 or self.stride_samples < 1:
            raise ConfigurationError("encoder kernel/stride resolve to < 1 sample at this rate")

    @property
    def kernel_samples(self) -> int:
        return int(round(self.encoder_kernel_ms * self.sample_rate / 1000.0))

    @property
    def stride_samples(self) -> int:
        return int(round(self.encoder_stride_ms * self.sample_rate / 1000.0))

    def n_frames(self, n_samples: int) -> int:
        """Frame count of an un-padded encoding of ``n_samples`` samples."""
        if n_samples < self.kernel_samples:
            raise ConfigurationError(
                f"input of {n_samples} samples is shorter than one kernel ({self.kernel_samples})"
            )
        return (n_samples - self.kernel_samples) // self.stride_samples + 1

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        return cls(**data)

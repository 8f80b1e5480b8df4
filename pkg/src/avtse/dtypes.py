"""Core data carriers: waveforms, video feature streams, mixture examples.

All audio is stored as 1-D float arrays with an explicit sample rate; video
features are frame-major (T_v, D_v) float matrices with an explicit frame
rate.  These objects are plain containers validated at construction; the
model layer converts them to torch tensors at its boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidInputError

DEFAULT_VISUAL_DIM = 512


@dataclass(frozen=True)
class AudioWaveform:
    """A sampled mono signal (amplitude nominally in [-1, 1])."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise InvalidInputError(f"waveform must be 1-D, got shape {samples.shape}")
        if samples.shape[0] < 1:
            raise InvalidInputError("waveform must contain at least one sample")
        if self.sample_rate <= 0:
            raise InvalidInputError(f"sample_rate must be positive, got {self.sample_rate}")
        if not np.all(np.isfinite(samples)):
            raise InvalidInputError("waveform contains non-finite samples")
        object.__setattr__(self, "samples", samples)

    @property
    def n_samples(self) -> int:
        return int(self.samples.shape[0])

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate

    def slice_seconds(self, start: float, stop: float) -> "AudioWaveform":
        a = int(round(start * self.sample_rate))
        b = int(round(stop * self.sample_rate))
        if not (0 <= a < b <= self.n_samples):
            raise InvalidInputError(f"slice [{start}, {stop})s out of range for {self.duration:.3f}s signal")
        return AudioWaveform(self.samples[a:b], self.sample_rate)

    def rms(self) -> float:
        return float(np.sqrt(np.mean(self.samples**2)))


@dataclass(frozen=True)
class VideoStreamSpec:
    """Metadata of the raw video the features were extracted from."""

    width: int = 100
    height: int = 50
    channels: int = 1
    frame_rate: float = 25.0


@dataclass(frozen=True)
class VideoFeatureStream:
    """Per-frame visual features (T_v x D_v), stand-in for a lip front-end.

    A dropped frame is represented as an all-zero row.
    """

    features: np.ndarray
    frame_rate: float = 25.0
    spec: VideoStreamSpec = field(default_factory=VideoStreamSpec)

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        if feats.ndim != 2:
            raise InvalidInputError(f"video features must be 2-D (T_v, D_v), got shape {feats.shape}")
        if feats.shape[0] < 1:
            raise InvalidInputError("video stream must contain at least one frame")
        if self.frame_rate <= 0:
            raise InvalidInputError(f"frame_rate must be positive, got {self.frame_rate}")
        if not np.all(np.isfinite(feats)):
            raise InvalidInputError("video features contain non-finite entries")
        object.__setattr__(self, "features", feats)

    @property
    def n_frames(self) -> int:
        return int(self.features.shape[0])

    @property
    def feature_dim(self) -> int:
        return int(self.features.shape[1])

    def slice_frames(self, start: int, stop: int) -> "VideoFeatureStream":
        if not (0 <= start < stop <= self.n_frames):
            raise InvalidInputError(f"frame slice [{start}, {stop}) out of range for {self.n_frames} frames")
        return replace(self, features=self.features[start:stop])


@dataclass(frozen=True)
class MixtureExample:
    """One training/evaluation item.

    Invariant: ``mixture = target + interferer`` sample-wise (the stored
    components already include any SIR scaling and joint peak rescale).
    """

    mixture: AudioWaveform
    target: AudioWaveform
    interferer: AudioWaveform
    enrolment: AudioWaveform
    video: VideoFeatureStream
    sir_db: float
    target_id: str
    interferer_id: str
    example_id: str = ""

    def __post_init__(self):
        n = self.mixture.n_samples
        if self.target.n_samples != n or self.interferer.n_samples != n:
            raise InvalidInputError("mixture/target/interferer lengths differ")
        if self.target_id == self.interferer_id:
            raise InvalidInputError("target and interferer must be different speakers")
        residual = self.mixture.samples - (self.target.samples + self.interferer.samples)
        if np.max(np.abs(residual)) > 1e-6:
            raise InvalidInputError("mixture is not the exact sum of target and interferer")

"""Mixture construction at controlled SIR and video corruption."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..dtypes import AudioWaveform, VideoFeatureStream
from ..errors import InvalidInputError


@dataclass(frozen=True)
class MixResult:
    """Outcome of mixing; mixture = target + interferer holds exactly.

    ``peak_rescale`` is the joint gain (<= 1) applied to keep the mixture
    peak within [-1, 1]; 1.0 when no rescale was needed.
    """

    mixture: AudioWaveform
    target: AudioWaveform
    interferer: AudioWaveform
    sir_db: float
    interferer_gain: float
    peak_rescale: float


def mix_at_sir(target: AudioWaveform, interferer: AudioWaveform, sir_db) -> MixResult:
    """Scale the interferer to the requested SIR and add.

    The interferer gain is ||s|| / (||i|| * 10^(sir/20)).  When the summed
    peak exceeds 1, target and interferer are rescaled jointly so additivity
    and the realized SIR are preserved.
    """
    if target.n_samples != interferer.n_samples:
        raise InvalidInputError(
            f"length mismatch: target {target.n_samples} vs interferer {interferer.n_samples}"
        )
    if target.sample_rate != interferer.sample_rate:
        raise InvalidInputError("sample rates differ")
    s = target.samples
    i = interferer.samples
    s_norm = np.linalg.norm(s)
    i_norm = np.linalg.norm(i)
    if s_norm == 0.0 or i_norm == 0.0:
        raise InvalidInputError("zero-energy signal cannot be mixed at a target SIR")

    gain = s_norm / (i_norm * 10.0 ** (sir_db / 20.0))
    scaled_i = gain * i
    mixture = s + scaled_i

    peak = np.max(np.abs(mixture))
    rescale = 1.0 / peak if peak > 1.0 else 1.0
    if rescale != 1.0:
        s = s * rescale
        scaled_i = scaled_i * rescale
        mixture = s + scaled_i

    fs = target.sample_rate
    return MixResult(
        mixture=AudioWaveform(mixture, fs),
        target=AudioWaveform(s, fs),
        interferer=AudioWaveform(scaled_i, fs),
        sir_db=float(sir_db),
        interferer_gain=float(gain),
        peak_rescale=float(rescale),
    )


def burst_frame_drop(video: VideoFeatureStream, rate, rng) -> VideoFeatureStream:
    """Zero one contiguous run of round(rate * T_v) frames at a random start."""
    if not 0.0 < rate < 1.0:
        raise InvalidInputError(f"drop rate must be in (0, 1), got {rate}")
    n_frames = video.n_frames
    n_drop = int(round(rate * n_frames))
    if n_drop == 0:
        return replace(video, features=video.features.copy())
    start = int(rng.integers(0, n_frames - n_drop + 1))
    feats = video.features.copy()
    feats[start : start + n_drop, :] = 0.0
    return replace(video, features=feats)

"""Synthetic speakers: resonant harmonic voices with paired visual features.

Each speaker is a harmonic template: a fundamental frequency plus a
formant-like resonance band that concentrates the harmonics' energy in a
speaker-specific frequency region.  An utterance drives the template with a
random smooth amplitude envelope (syllable-like, with pronounced dips).

The paired visual features carry the same two kinds of information real lip
features provide: activity timing (the frame-rate envelope, projected on a
fixed pattern) and speaker identity (the template's absolute-frequency
spectral footprint, binned on a fixed log grid), plus small observation
noise.  Both halves are deterministic functions of (speaker, RNG stream),
so a whole corpus is reproducible from its seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..dtypes import DEFAULT_VISUAL_DIM, AudioWaveform, VideoFeatureStream
from ..errors import InvalidInputError

ENVELOPE_FLOOR = 0.08
RMS_RANGE = (0.08, 0.30)
VIDEO_NOISE_STD = 0.02
FOOTPRINT_GRID = 32  # log-frequency grid points for the identity code
FOOTPRINT_RANGE_HZ = (90.0, 3800.0)
FOOTPRINT_SMOOTH_OCTAVES = 0.5  # bump width: neighbouring bands share code mass
MAX_HARMONIC_HZ = 3600.0
RESONANCE_JITTER_OCTAVES = 0.5  # per-utterance wander around the base resonance
_PROJECTION_SEED = 0x5EED_FACE  # fixed: the envelope pattern is stable across corpora


@dataclass(frozen=True)
class SpeakerProfile:
    """Identity plus spectral template.

    ``spectral_signature`` is [f0_hz, resonance_hz, resonance_octaves]: the
    fundamental and the center/width of the resonance band shaping the
    harmonic amplitudes.
    """

    id: str
    spectral_signature: np.ndarray
    n_utterances: int

    @property
    def f0(self) -> float:
        return float(self.spectral_signature[0])

    @property
    def resonance_hz(self) -> float:
        return float(self.spectral_signature[1])

    @property
    def resonance_octaves(self) -> float:
        return float(self.spectral_signature[2])


def make_speakers(n_speakers, utterances_per_speaker, seed,
                  f0_range=(100.0, 260.0), resonance_range=(250.0, 2000.0)):
    """Create ``n_speakers`` profiles with spread fundamentals and resonances."""
    if n_speakers < 1:
        raise InvalidInputError("need at least one speaker")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5B]))
    f0s = np.linspace(f0_range[0], f0_range[1], n_speakers)
    resonances = np.geomspace(resonance_range[0], resonance_range[1], n_speakers)
    speakers = []
    for i in range(n_speakers):
        width = rng.uniform(0.25, 0.35)  # octaves
        signature = np.array([f0s[i], resonances[i], width])
        speakers.append(
            SpeakerProfile(
                id=f"spk{i:03d}",
                spectral_signature=signature,
                n_utterances=utterances_per_speaker,
            )
        )
    return speakers


def harmonic_amplitudes(speaker: SpeakerProfile, sample_rate, resonance_hz=None):
    """(frequencies, amplitudes) of the audible harmonics of a template.

    ``resonance_hz`` overrides the base resonance (per-utterance wander).
    """
    resonance = speaker.resonance_hz if resonance_hz is None else resonance_hz
    limit = min(MAX_HARMONIC_HZ, 0.45 * sample_rate)
    n = int(limit / speaker.f0)
    freqs = speaker.f0 * np.arange(1, n + 1)
    amps = np.exp(
        -np.log2(freqs / resonance) ** 2 / (2.0 * speaker.resonance_octaves**2)
    )
    keep = amps > 1e-3
    return freqs[keep], amps[keep]


def _smooth_envelope(n_samples, sample_rate, rng):
    """Syllable-like trajectory in [ENVELOPE_FLOOR, 1], ~4 Hz modulation."""
    n_ctrl = max(4, int(round(n_samples / sample_rate * 4.0)) + 2)
    ctrl = rng.uniform(0.0, 1.0, size=n_ctrl)
    t_ctrl = np.linspace(0.0, 1.0, n_ctrl)
    t = np.linspace(0.0, 1.0, n_samples)
    env = np.interp(t, t_ctrl, ctrl)
    win = max(3, int(sample_rate * 0.02) | 1)
    kernel = np.hanning(win)
    kernel /= kernel.sum()
    env = np.convolve(np.pad(env, win // 2, mode="edge"), kernel, mode="valid")
    env = env**1.5  # deepen the dips
    return ENVELOPE_FLOOR + (1.0 - ENVELOPE_FLOOR) * env


@lru_cache(maxsize=8)
def _envelope_pattern(half_dim):
    rng = np.random.default_rng(np.random.SeedSequence([_PROJECTION_SEED, half_dim]))
    pattern = rng.standard_normal(half_dim)
    return pattern / np.linalg.norm(pattern)


def _fit_length(vec, length):
    """Cyclic-tile up or group-average down to ``length`` entries."""
    if length == len(vec):
        return vec.copy()
    if length > len(vec):
        return np.resize(vec, length)
    edges = np.linspace(0, len(vec), length + 1).astype(int)
    return np.array([vec[a:b].mean() for a, b in zip(edges[:-1], edges[1:])])


def identity_code(speaker: SpeakerProfile, visual_dim=DEFAULT_VISUAL_DIM,
                  sample_rate=16000) -> np.ndarray:
    """Unit-norm identity block: a smooth spectral footprint of the template.

    The template's resonance region is rendered as a wide Gaussian bump on
    a fixed log-frequency grid (plus a pitch ramp), so the code is a smooth
    function of where the speaker's energy sits: codes of nearby templates
    overlap, and an unseen speaker's code lies on the same continuum.
    """
    lo, hi = FOOTPRINT_RANGE_HZ
    grid = np.linspace(np.log2(lo), np.log2(hi), FOOTPRINT_GRID)
    center = np.log2(speaker.resonance_hz)
    bump = np.exp(-((grid - center) ** 2) / (2.0 * FOOTPRINT_SMOOTH_OCTAVES**2))
    pitch = np.exp(-((grid - np.log2(speaker.f0)) ** 2) / (2.0 * FOOTPRINT_SMOOTH_OCTAVES**2))
    footprint = np.concatenate([bump, 0.5 * pitch])
    code = _fit_length(footprint, visual_dim - visual_dim // 2)
    return code / np.linalg.norm(code)


def synth_utterance(
    speaker: SpeakerProfile,
    duration,
    rng,
    sample_rate=16000,
    fps=25.0,
    visual_dim=DEFAULT_VISUAL_DIM,
):
    """One audio-visual utterance of ``duration`` seconds.

    Returns (AudioWaveform, VideoFeatureStream); deterministic given
    (speaker, rng state).
    """
    if duration <= 0:
        raise InvalidInputError(f"duration must be positive, got {duration}")
    n_samples = int(round(duration * sample_rate))
    env = _smooth_envelope(n_samples, sample_rate, rng)

    t = np.arange(n_samples) / sample_rate
    # each utterance wanders around the base resonance (vowel-like variety);
    # the identity code below stays pinned to the base template
    jitter = rng.uniform(-RESONANCE_JITTER_OCTAVES, RESONANCE_JITTER_OCTAVES)
    freqs, amps = harmonic_amplitudes(
        speaker, sample_rate, resonance_hz=speaker.resonance_hz * 2.0**jitter
    )
    audio = np.zeros(n_samples)
    for freq, amp in zip(freqs, amps):
        audio += amp * np.sin(2.0 * np.pi * freq * t + rng.uniform(0.0, 2.0 * np.pi))
    audio *= env
    target_rms = rng.uniform(*RMS_RANGE)
    audio *= target_rms / np.sqrt(np.mean(audio**2))

    n_frames = max(1, int(round(duration * fps)))
    frame_edges = np.linspace(0, n_samples, n_frames + 1).astype(int)
    frame_env = np.array(
        [env[a:b].mean() if b > a else env[min(a, n_samples - 1)] for a, b in zip(frame_edges[:-1], frame_edges[1:])]
    )

    half = visual_dim // 2
    code = identity_code(speaker, visual_dim, sample_rate)
    feats = np.empty((n_frames, visual_dim))
    feats[:, :half] = frame_env[:, None] * _envelope_pattern(half)[None, :]
    feats[:, half:] = code[None, :]
    feats += VIDEO_NOISE_STD * rng.standard_normal(feats.shape)

    return (
        AudioWaveform(audio, sample_rate),
        VideoFeatureStream(feats, frame_rate=fps),
    )

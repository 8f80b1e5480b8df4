"""Self-enrolment protocol: bootstrap the enrolment from extracted speech.

A long example (three same-speaker utterances with a continuous interferer)
is processed in three equal segments: the first in the video-only
condition, the second with the first segment's extracted audio as the
enrolment, and the third in the audio-only condition using the
concatenated extracted audio of the first two segments (video absent).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from ..datagen.corpus import (
    _COMPOSE_TAG,
    MIN_UTTERANCES_SELF_ENROL,
    Corpus,
)
from ..datagen.mixing import mix_at_sir
from ..dtypes import AudioWaveform, MixtureExample, VideoFeatureStream
from ..errors import ConfigurationError, InvalidInputError
from ..model.network import AuxInput
from .metrics import si_sdri

SEGMENT_LABELS = ("VoTSE", "MTSE", "AoTSE")


def compose_self_enrolment_examples(corpus: Corpus, n_examples, split="test"):
    """Build long examples (3 concatenated utterances) from a split's speakers.

    Speakers with fewer than four utterances are excluded.  The interferer
    is a different speaker overlaid continuously (three of their utterances
    concatenated); one SIR is drawn per example.
    """
    spec = corpus.spec
    pool = [s for s in corpus.pools[split] if s.n_utterances >= MIN_UTTERANCES_SELF_ENROL]
    if len(pool) < 2:
        raise ConfigurationError(
            f"split {split!r} has {len(pool)} speakers with >= "
            f"{MIN_UTTERANCES_SELF_ENROL} utterances; need at least 2"
        )
    examples = []
    for i in range(n_examples):
        rng = np.random.default_rng(np.random.SeedSequence([spec.seed, _COMPOSE_TAG, i]))
        target_spk = pool[int(rng.integers(len(pool)))]
        others = [s for s in pool if s.id != target_spk.id]
        interferer_spk = others[int(rng.integers(len(others)))]
        target_utts = rng.permutation(target_spk.n_utterances)[:3]
        interferer_utts = rng.permutation(interferer_spk.n_utterances)[:3]
        sir = float(rng.uniform(*spec.sir_range))

        target_parts = [corpus.bank.get(target_spk, int(j)) for j in target_utts]
        interferer_parts = [corpus.bank.get(interferer_spk, int(j)) for j in interferer_utts]
        target_audio = AudioWaveform(
            np.concatenate([a.samples for a, _ in target_parts]), spec.sample_rate
        )
        video = VideoFeatureStream(
            np.concatenate([v.features for _, v in target_parts]), frame_rate=spec.fps
        )
        interferer_audio = AudioWaveform(
            np.concatenate([a.samples for a, _ in interferer_parts]), spec.sample_rate
        )
        mixed = mix_at_sir(target_audio, interferer_audio, sir)
        # the enrolment slot is unused by the protocol; keep a distinct
        # utterance there so the example is a valid MixtureExample
        spare = [j for j in range(target_spk.n_utterances) if j not in set(int(x) for x in target_utts)]
        enrol_audio, _ = corpus.bank.get(target_spk, spare[0])
        examples.append(
            MixtureExample(
                mixture=mixed.mixture,
                target=mixed.target,
                interferer=mixed.interferer,
                enrolment=enrol_audio,
                video=video,
                sir_db=sir,
                target_id=target_spk.id,
                interferer_id=interferer_spk.id,
                example_id=f"selfenrol-{i:06d}",
            )
        )
    return examples


@dataclass
class SelfEnrolmentResult:
    """Per-segment SI-SDRi plus the exact protocol geometry."""

    segment_sisdri: tuple  # (VoTSE, MTSE, AoTSE) in dB
    boundaries: tuple  # sample indices (0, L, 2L, 3L)
    segment3_enrolment_samples: int


def self_enrolment_run(model, example: MixtureExample, strategy) -> SelfEnrolmentResult:
    """Run the three-segment protocol on one long example."""
    n = example.mixture.n_samples
    if n % 3 != 0:
        raise InvalidInputError(
            f"example length {n} is not divisible into three equal segments"
        )
    seg_len = n // 3
    n_frames = example.video.n_frames
    if n_frames % 3 != 0:
        raise InvalidInputError(
            f"video length {n_frames} frames is not divisible into three segments"
        )
    frame_len = n_frames // 3
    drops_by_embedding = strategy == "MDT"

    def seg_audio(arr, k):
        return torch.as_tensor(
            arr[k * seg_len : (k + 1) * seg_len], dtype=torch.float32
        ).unsqueeze(0)

    def seg_video(k):
        feats = example.video.features[k * frame_len : (k + 1) * frame_len]
        return torch.as_tensor(feats, dtype=torch.float32).unsqueeze(0)

    mix = example.mixture.samples
    ref = example.target.samples

    # segment 1: video only
    if drops_by_embedding:
        aux1 = AuxInput(video=seg_video(0), use_audio=False)
    else:
        aux1 = AuxInput(enrolment=torch.zeros(1, seg_len), video=seg_video(0))
    with torch.no_grad():
        est1, _ = model(seg_audio(mix, 0), aux1)

        # segment 2: both, enrolment = first extract
        aux2 = AuxInput(enrolment=est1, video=seg_video(1))
        est2, _ = model(seg_audio(mix, 1), aux2)

        # segment 3: audio only, enrolment = extracts of segments 1-2
        enrol3 = torch.cat([est1, est2], dim=1)
        if drops_by_embedding:
            aux3 = AuxInput(enrolment=enrol3, use_video=False)
        else:
            aux3 = AuxInput(enrolment=enrol3, video=torch.zeros(1, frame_len, example.video.feature_dim))
        est3, _ = model(seg_audio(mix, 2), aux3)

    estimates = [est1[0].numpy(), est2[0].numpy(), est3[0].numpy()]
    values = tuple(
        si_sdri(
            mix[k * seg_len : (k + 1) * seg_len],
            estimates[k],
            ref[k * seg_len : (k + 1) * seg_len],
        )
        for k in range(3)
    )
    return SelfEnrolmentResult(
        segment_sisdri=values,
        boundaries=(0, seg_len, 2 * seg_len, 3 * seg_len),
        segment3_enrolment_samples=int(enrol3.shape[1]),
    )

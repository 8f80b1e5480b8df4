import numpy as np
import pytest

from avtse.datagen.speakers import (
    identity_code,
    make_speakers,
    synth_utterance,
)
from avtse.errors import InvalidInputError


def test_make_speakers_distinct_signatures():
    speakers = make_speakers(8, 12, seed=0)
    assert len(speakers) == 8
    f0s = [s.f0 for s in speakers]
    assert len(set(f0s)) == 8
    for a, b in zip(speakers, speakers[1:]):
        assert not np.allclose(a.spectral_signature, b.spectral_signature)


def test_synth_deterministic_under_seed():
    spk = make_speakers(2, 3, seed=1)[0]
    a_audio, a_video = synth_utterance(spk, 0.5, np.random.default_rng(5), sample_rate=8000)
    b_audio, b_video = synth_utterance(spk, 0.5, np.random.default_rng(5), sample_rate=8000)
    assert np.array_equal(a_audio.samples, b_audio.samples)
    assert np.array_equal(a_video.features, b_video.features)


def test_audio_rms_in_declared_range():
    speakers = make_speakers(4, 2, seed=2)
    rng = np.random.default_rng(0)
    for spk in speakers:
        for _ in range(3):
            audio, _ = synth_utterance(spk, 0.5, rng, sample_rate=8000)
            assert 0.05 <= audio.rms() <= 0.5


@pytest.mark.parametrize("duration,fps,expected", [(3.0, 25.0, 75), (0.5, 25.0, 12), (1.0, 30.0, 30)])
def test_video_frame_count(duration, fps, expected):
    spk = make_speakers(1, 1, seed=3)[0]
    _, video = synth_utterance(spk, duration, np.random.default_rng(1), sample_rate=8000, fps=fps)
    assert video.n_frames == expected


def test_invalid_duration():
    spk = make_speakers(1, 1, seed=3)[0]
    with pytest.raises(InvalidInputError):
        synth_utterance(spk, 0.0, np.random.default_rng(0))


def test_identity_codes_separate_speakers():
    speakers = make_speakers(8, 1, seed=4)
    codes = np.stack([identity_code(s, 64) for s in speakers])
    gram = codes @ codes.T
    off_diag = gram - np.diag(np.diag(gram))
    assert np.abs(off_diag).max() < 0.999  # no two speakers share a code


def test_linear_probe_recovers_speaker_id():
    # frames from held-out utterances, ridge one-vs-rest on the raw features
    speakers = make_speakers(8, 4, seed=5)
    dim = 64
    train_x, train_y, test_x, test_y = [], [], [], []
    for label, spk in enumerate(speakers):
        for j in range(4):
            rng = np.random.default_rng([label, j])
            _, video = synth_utterance(spk, 0.5, rng, sample_rate=8000, visual_dim=dim)
            dest_x, dest_y = (train_x, train_y) if j < 3 else (test_x, test_y)
            dest_x.append(video.features)
            dest_y.extend([label] * video.n_frames)
    x = np.concatenate(train_x)
    y = np.array(train_y)
    targets = np.eye(len(speakers))[y]
    w, *_ = np.linalg.lstsq(
        np.hstack([x, np.ones((len(x), 1))]), targets, rcond=None
    )
    xt = np.hstack([np.concatenate(test_x), np.ones((sum(len(v) for v in test_x), 1))])
    pred = np.argmax(xt @ w, axis=1)
    accuracy = np.mean(pred == np.array(test_y))
    assert accuracy > 0.95

import numpy as np
import pytest

from avtse.dtypes import AudioWaveform, MixtureExample, VideoFeatureStream
from avtse.errors import InvalidInputError


def test_waveform_basic():
    w = AudioWaveform(np.zeros(100), 8000)
    assert w.n_samples == 100
    assert w.duration == pytest.approx(100 / 8000)


@pytest.mark.parametrize(
    "samples,fs",
    [
        (np.zeros((2, 10)), 8000),
        (np.zeros(0), 8000),
        (np.zeros(10), 0),
        (np.array([1.0, np.nan]), 8000),
        (np.array([1.0, np.inf]), 8000),
    ],
)
def test_waveform_rejects_bad_input(samples, fs):
    with pytest.raises(InvalidInputError):
        AudioWaveform(samples, fs)


def test_waveform_slice_seconds():
    w = AudioWaveform(np.arange(8000, dtype=float) / 8000, 8000)
    s = w.slice_seconds(0.25, 0.5)
    assert s.n_samples == 2000
    assert s.samples[0] == w.samples[2000]


def test_video_stream_validation():
    v = VideoFeatureStream(np.zeros((75, 512)))
    assert v.n_frames == 75 and v.feature_dim == 512
    with pytest.raises(InvalidInputError):
        VideoFeatureStream(np.zeros((0, 512)))
    with pytest.raises(InvalidInputError):
        VideoFeatureStream(np.full((3, 4), np.nan))


def test_mixture_example_additivity_enforced():
    fs = 8000
    s = AudioWaveform(0.1 * np.ones(100), fs)
    i = AudioWaveform(0.05 * np.ones(100), fs)
    x = AudioWaveform(s.samples + i.samples, fs)
    v = VideoFeatureStream(np.zeros((3, 8)))
    ex = MixtureExample(x, s, i, s, v, 0.0, "a", "b")
    assert ex.example_id == ""

    bad = AudioWaveform(x.samples + 1e-3, fs)
    with pytest.raises(InvalidInputError):
        MixtureExample(bad, s, i, s, v, 0.0, "a", "b")
    with pytest.raises(InvalidInputError):
        MixtureExample(x, s, i, s, v, 0.0, "a", "a")

"""Audio-visual target speaker extraction at desk scale.

Library plus CLI harness: the extraction network, three training
strategies, synthetic audio-visual corpus generation, and the inference
condition / self-enrolment evaluation protocols.
"""

from .dtypes import AudioWaveform, MixtureExample, VideoFeatureStream, VideoStreamSpec
from .errors import (
    AvtseError,
    ConfigurationError,
    CorpusError,
    FileFormatError,
    InvalidInputError,
    TrainingError,
)

__version__ = "0.1.0"

__all__ = [
    "AudioWaveform",
    "VideoFeatureStream",
    "VideoStreamSpec",
    "MixtureExample",
    "AvtseError",
    "InvalidInputError",
    "ConfigurationError",
    "FileFormatError",
    "CorpusError",
    "TrainingError",
    "__version__",
]

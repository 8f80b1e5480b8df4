from .speakers import SpeakerProfile, make_speakers, synth_utterance
from .mixing import MixResult, burst_frame_drop, mix_at_sir
from .corpus import Corpus, CorpusSpec, MaterializedSplit, build_corpus, dynamic_remix, load_corpus
from .fileio import (
    read_features,
    read_manifest,
    read_wav,
    write_features,
    write_manifest,
    write_wav,
)

__all__ = [
    "SpeakerProfile",
    "make_speakers",
    "synth_utterance",
    "MixResult",
    "mix_at_sir",
    "burst_frame_drop",
    "Corpus",
    "CorpusSpec",
    "MaterializedSplit",
    "build_corpus",
    "load_corpus",
    "dynamic_remix",
    "read_wav",
    "write_wav",
    "read_features",
    "write_features",
    "read_manifest",
    "write_manifest",
]

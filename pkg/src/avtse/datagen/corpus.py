"""Corpus construction: speaker pools, example synthesis, persistence.

A corpus is a pure function of its spec: speakers, utterances and examples
all derive from per-item RNG substreams of the corpus seed.  Persistence is
idempotent; a rebuild over an existing tree rewrites only missing or
corrupted files (verified by recorded checksums).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np
import yaml

from ..dtypes import AudioWaveform, MixtureExample, VideoFeatureStream
from ..errors import ConfigurationError, CorpusError
from .fileio import (
    read_features,
    read_manifest,
    read_wav,
    sidecar_path,
    write_features,
    write_manifest,
    write_wav,
)
from .mixing import mix_at_sir
from .speakers import make_speakers, synth_utterance

SPLITS = ("train", "val", "test")
_SPLIT_TAG = {"train": 1, "val": 2, "test": 3}
_UTT_TAG = 11
_EXAMPLE_TAG = 12
_REMIX_TAG = 13
_COMPOSE_TAG = 14

MIN_UTTERANCES = 3  # speakers below this are excluded from corpus builds
MIN_UTTERANCES_SELF_ENROL = 4


@dataclass
class CorpusSpec:
    """Parameters of a synthetic corpus build."""

    n_train: int = 128
    n_val: int = 32
    n_test: int = 32
    sample_rate: int = 16000
    clip_seconds: float = 3.0
    fps: float = 25.0
    sir_range: tuple = (-5.0, 5.0)
    seed: int = 0
    n_speakers: int = 16
    utterances_per_speaker: int = 8
    visual_dim: int = 512

    def __post_init__(self):
        self.sir_range = tuple(float(v) for v in self.sir_range)
        if self.sir_range[0] > self.sir_range[1]:
            raise ConfigurationError(f"sir_range lo > hi: {self.sir_range}")
        for name in ("n_train", "n_val", "n_test", "sample_rate", "n_speakers",
                     "utterances_per_speaker", "visual_dim"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be positive")
        if self.clip_seconds <= 0 or self.fps <= 0:
            raise ConfigurationError("clip_seconds and fps must be positive")

    def split_size(self, split):
        return {"train": self.n_train, "val": self.n_val, "test": self.n_test}[split]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sir_range"] = list(self.sir_range)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "CorpusSpec":
        return cls(**data)


def split_speaker_pool(speakers):
    """Deal eligible speakers round-robin (by template order) into the splits.

    Speakers with fewer than MIN_UTTERANCES utterances are excluded.  Split
    quotas follow a 2:1:1 ratio with at least two speakers per split.
    """
    eligible = [s for s in speakers if s.n_utterances >= MIN_UTTERANCES]
    n = len(eligible)
    n_val = max(2, round(n * 0.25))
    n_test = max(2, round(n * 0.25))
    n_train = n - n_val - n_test
    if n_train < 2:
        raise ConfigurationError(
            f"only {n} eligible speakers (>= {MIN_UTTERANCES} utterances); need at least 6"
        )
    quotas = {"train": n_train, "val": n_val, "test": n_test}
    acc = {k: 0.0 for k in SPLITS}
    pools = {k: [] for k in SPLITS}
    for spk in eligible:
        for k in SPLITS:
            acc[k] += quotas[k] / n
        pick = max(SPLITS, key=lambda k: (acc[k], -SPLITS.index(k)))
        acc[pick] -= 1.0
        pools[pick].append(spk)
    return pools


class UtteranceBank:
    """Lazy, cached utterance synthesis keyed by (speaker index, utterance index)."""

    def __init__(self, spec: CorpusSpec, speakers):
        self.spec = spec
        self.speakers = speakers
        self.index = {s.id: i for i, s in enumerate(speakers)}
        self._cache = {}

    def get(self, speaker, utt_index):
        key = (speaker.id, utt_index)
        if key not in self._cache:
            if utt_index >= speaker.n_utterances:
                raise CorpusError(f"{speaker.id} has no utterance {utt_index}")
            rng = np.random.default_rng(
                np.random.SeedSequence(
                    [self.spec.seed, _UTT_TAG, self.index[speaker.id], utt_index]
                )
            )
            self._cache[key] = synth_utterance(
                speaker,
                self.spec.clip_seconds,
                rng,
                sample_rate=self.spec.sample_rate,
                fps=self.spec.fps,
                visual_dim=self.spec.visual_dim,
            )
        return self._cache[key]


def make_example(spec: CorpusSpec, pools, bank: UtteranceBank, split, index) -> MixtureExample:
    """Synthesize one example; pure function of (spec, split, index)."""
    pool = pools[split]
    rng = np.random.default_rng(
        np.random.SeedSequence([spec.seed, _EXAMPLE_TAG, _SPLIT_TAG[split], index])
    )
    target_spk = pool[int(rng.integers(len(pool)))]
    others = [s for s in pool if s.id != target_spk.id]
    interferer_spk = others[int(rng.integers(len(others)))]

    n_utts = target_spk.n_utterances
    target_utt = int(rng.integers(n_utts))
    enrol_utt = int(rng.integers(n_utts - 1))
    if enrol_utt >= target_utt:
        enrol_utt += 1
    interferer_utt = int(rng.integers(interferer_spk.n_utterances))
    sir = float(rng.uniform(*spec.sir_range))

    target_audio, target_video = bank.get(target_spk, target_utt)
    enrol_audio, _ = bank.get(target_spk, enrol_utt)
    interferer_audio, _ = bank.get(interferer_spk, interferer_utt)

    mixed = mix_at_sir(target_audio, interferer_audio, sir)
    return MixtureExample(
        mixture=mixed.mixture,
        target=mixed.target,
        interferer=mixed.interferer,
        enrolment=enrol_audio,
        video=target_video,
        sir_db=sir,
        target_id=target_spk.id,
        interferer_id=interferer_spk.id,
        example_id=f"{split}-{index:06d}",
    )


@dataclass
class MaterializedSplit:
    """A split loaded into stacked arrays for fast batching."""

    mixture: np.ndarray  # [M, T]
    target: np.ndarray
    interferer: np.ndarray
    enrolment: np.ndarray
    video: np.ndarray  # [M, T_v, D_v]
    sir_db: np.ndarray
    target_ids: list
    interferer_ids: list
    example_ids: list
    sample_rate: int
    fps: float

    def __len__(self):
        return self.mixture.shape[0]

    def example(self, i) -> MixtureExample:
        fs = self.sample_rate
        return MixtureExample(
            mixture=AudioWaveform(self.mixture[i], fs),
            target=AudioWaveform(self.target[i], fs),
            interferer=AudioWaveform(self.interferer[i], fs),
            enrolment=AudioWaveform(self.enrolment[i], fs),
            video=VideoFeatureStream(self.video[i], frame_rate=self.fps),
            sir_db=float(self.sir_db[i]),
            target_id=self.target_ids[i],
            interferer_id=self.interferer_ids[i],
            example_id=self.example_ids[i],
        )


def _materialize(examples, sample_rate, fps) -> MaterializedSplit:
    return MaterializedSplit(
        mixture=np.stack([e.mixture.samples for e in examples]),
        target=np.stack([e.target.samples for e in examples]),
        interferer=np.stack([e.interferer.samples for e in examples]),
        enrolment=np.stack([e.enrolment.samples for e in examples]),
        video=np.stack([e.video.features for e in examples]),
        sir_db=np.array([e.sir_db for e in examples]),
        target_ids=[e.target_id for e in examples],
        interferer_ids=[e.interferer_id for e in examples],
        example_ids=[e.example_id for e in examples],
        sample_rate=sample_rate,
        fps=fps,
    )


class Corpus:
    """Access to a (possibly disk-backed) corpus.

    The generator objects (speakers, pools, utterance bank) are rebuilt from
    the spec on demand, so a corpus loaded from disk can still compose new
    material (e.g. long self-enrolment examples) deterministically.
    """

    def __init__(self, spec: CorpusSpec, root=None):
        self.spec = spec
        self.root = Path(root) if root is not None else None
        self._pools = None
        self._bank = None
        self._records = None

    @property
    def speakers(self):
        return self.bank.speakers

    @property
    def bank(self) -> UtteranceBank:
        if self._bank is None:
            speakers = make_speakers(
                self.spec.n_speakers, self.spec.utterances_per_speaker, self.spec.seed
            )
            self._bank = UtteranceBank(self.spec, speakers)
        return self._bank

    @property
    def pools(self):
        if self._pools is None:
            self._pools = split_speaker_pool(self.speakers)
        return self._pools

    def example(self, split, index) -> MixtureExample:
        if self.root is not None:
            return self._load_example(split, index)
        return make_example(self.spec, self.pools, self.bank, split, index)

    def records(self, split):
        if self.root is None:
            raise CorpusError("in-memory corpus has no manifest records")
        if self._records is None:
            recs = read_manifest(self.root / "manifest.tsv")
            self._records = {s: [r for r in recs if r["split"] == s] for s in SPLITS}
        return self._records[split]

    def _load_example(self, split, index) -> MixtureExample:
        rec = self.records(split)[index]
        target = read_wav(self.root / rec["target_path"])
        interferer = read_wav(self.root / rec["interferer_path"])
        enrolment = read_wav(self.root / rec["enrolment_path"])
        video = read_features(self.root / rec["video_path"])
        # reconstruct the mixture from the quantized components so the
        # sample-wise additivity invariant holds exactly after PCM16
        mixture = AudioWaveform(target.samples + interferer.samples, target.sample_rate)
        return MixtureExample(
            mixture=mixture,
            target=target,
            interferer=interferer,
            enrolment=enrolment,
            video=video,
            sir_db=rec["sir_db"],
            target_id=rec["target_id"],
            interferer_id=rec["interferer_id"],
            example_id=rec["example_id"],
        )

    def materialize(self, split) -> MaterializedSplit:
        n = self.spec.split_size(split)
        examples = [self.example(split, i) for i in range(n)]
        return _materialize(examples, self.spec.sample_rate, self.spec.fps)


@dataclass
class BuildStats:
    files_written: int = 0
    files_skipped: int = 0
    manifest_sha256: str = ""


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _write_if_needed(path: Path, producer, recorded_sha, stats: BuildStats):
    """Write file unless it already exists with the recorded checksum."""
    if path.exists() and recorded_sha is not None:
        if _sha256(path.read_bytes()) == recorded_sha:
            stats.files_skipped += 1
            return
    path.parent.mkdir(parents=True, exist_ok=True)
    producer(path)
    stats.files_written += 1


def build_corpus(spec: CorpusSpec, root) -> tuple[Corpus, BuildStats]:
    """Persist a corpus at ``root``; idempotent for an identical spec."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    spec_path = root / "corpus.yaml"
    spec_text = yaml.safe_dump(spec.to_dict(), sort_keys=True)
    if spec_path.exists():
        existing = spec_path.read_text()
        if existing != spec_text:
            raise CorpusError(
                f"{root} already holds a corpus built from a different spec; "
                "use a fresh directory or delete it first"
            )
    else:
        spec_path.write_text(spec_text)

    checks_path = root / "checksums.txt"
    recorded = {}
    if checks_path.exists():
        for ln in checks_path.read_text().splitlines():
            if ln.strip():
                rel, sha = ln.rsplit("\t", 1)
                recorded[rel] = sha

    corpus = Corpus(spec)  # in-memory generator view
    stats = BuildStats()
    records = []
    checksums = {}
    for split in SPLITS:
        for i in range(spec.split_size(split)):
            ex = make_example(spec, corpus.pools, corpus.bank, split, i)
            exdir = Path(split) / f"ex{i:06d}"
            paths = {
                "mixture_path": exdir / "mixture.wav",
                "target_path": exdir / "target.wav",
                "interferer_path": exdir / "interferer.wav",
                "enrolment_path": exdir / "enrolment.wav",
                "video_path": exdir / "video.f32",
            }
            waves = {
                "mixture_path": ex.mixture,
                "target_path": ex.target,
                "interferer_path": ex.interferer,
                "enrolment_path": ex.enrolment,
            }
            for key, rel in paths.items():
                target_path = root / rel
                rel_s = str(rel)
                if key == "video_path":
                    producer = lambda p, v=ex.video: write_features(p, v)
                else:
                    producer = lambda p, w=waves[key]: write_wav(p, w)
                _write_if_needed(target_path, producer, recorded.get(rel_s), stats)
                checksums[rel_s] = _sha256(target_path.read_bytes())
                if key == "video_path":
                    meta_rel = str(rel) + ".meta.json"
                    checksums[meta_rel] = _sha256(sidecar_path(target_path).read_bytes())
            records.append(
                {
                    "split": split,
                    "example_id": ex.example_id,
                    "target_id": ex.target_id,
                    "interferer_id": ex.interferer_id,
                    "sir_db": repr(ex.sir_db),
                    "seed": spec.seed,
                    **{k: str(v) for k, v in paths.items()},
                }
            )

    manifest_path = root / "manifest.tsv"
    write_manifest(manifest_path, records)
    checks_text = "\n".join(f"{rel}\t{sha}" for rel, sha in sorted(checksums.items())) + "\n"
    checks_path.write_text(checks_text)
    stats.manifest_sha256 = _sha256(manifest_path.read_bytes())
    return Corpus(spec, root=root), stats


def load_corpus(root) -> Corpus:
    root = Path(root)
    spec_path = root / "corpus.yaml"
    if not spec_path.exists():
        raise CorpusError(f"no corpus at {root} (missing corpus.yaml)")
    spec = CorpusSpec.from_dict(yaml.safe_load(spec_path.read_text()))
    if not (root / "manifest.tsv").exists():
        raise CorpusError(f"no manifest at {root}; the corpus build did not finish")
    return Corpus(spec, root=root)


def dynamic_remix(split: MaterializedSplit, epoch, seed, sir_range) -> MaterializedSplit:
    """Re-pair targets with other examples' interferer stems at fresh SIRs.

    Deterministic in (seed, epoch); targets, enrolments and videos are kept,
    so only the interference changes between epochs.
    """
    m = len(split)
    rng = np.random.default_rng(np.random.SeedSequence([seed, _REMIX_TAG, epoch]))
    perm = rng.permutation(m)
    sirs = rng.uniform(sir_range[0], sir_range[1], size=m)

    fs = split.sample_rate
    mixture = np.empty_like(split.mixture)
    target = np.empty_like(split.target)
    interferer = np.empty_like(split.interferer)
    interferer_ids = []
    for i in range(m):
        j = int(perm[i])
        k = 0
        while split.interferer_ids[j] == split.target_ids[i]:
            k += 1
            j = int(perm[(i + k) % m])
        mixed = mix_at_sir(
            AudioWaveform(split.target[i], fs),
            AudioWaveform(split.interferer[j], fs),
            float(sirs[i]),
        )
        mixture[i] = mixed.mixture.samples
        target[i] = mixed.target.samples
        interferer[i] = mixed.interferer.samples
        interferer_ids.append(split.interferer_ids[j])
    return MaterializedSplit(
        mixture=mixture,
        target=target,
        interferer=interferer,
        enrolment=split.enrolment,
        video=split.video,
        sir_db=sirs,
        target_ids=split.target_ids,
        interferer_ids=interferer_ids,
        example_ids=split.example_ids,
        sample_rate=fs,
        fps=split.fps,
    )

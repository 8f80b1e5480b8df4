"""File formats: PCM16 WAV audio, raw float32 feature matrices, TSV manifests.

The WAV reader walks RIFF chunks itself so parse failures can name the byte
offset.  Feature files are little-endian float32, frame-major, with a JSON
sidecar recording {frames, dim, fps}; their round-trip is bit-exact.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..dtypes import AudioWaveform, VideoFeatureStream
from ..errors import FileFormatError

PCM16_SCALE = 32767.0


def write_wav(path, wave: AudioWaveform):
    """Write mono PCM16 little-endian WAV."""
    samples = np.clip(wave.samples, -1.0, 1.0)
    pcm = np.round(samples * PCM16_SCALE).astype("<i2")
    data = pcm.tobytes()
    fs = wave.sample_rate
    byte_rate = fs * 2
    header = b"".join(
        [
            b"RIFF",
            struct.pack("<I", 36 + len(data)),
            b"WAVE",
            b"fmt ",
            struct.pack("<IHHIIHH", 16, 1, 1, fs, byte_rate, 2, 16),
            b"data",
            struct.pack("<I", len(data)),
        ]
    )
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(header + data)


def read_wav(path) -> AudioWaveform:
    """Read a mono PCM16 WAV; raises FileFormatError with byte offsets."""
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < 12:
        raise FileFormatError("file too short for a RIFF header", path=path, offset=0)
    if blob[0:4] != b"RIFF":
        raise FileFormatError("missing RIFF magic", path=path, offset=0)
    if blob[8:12] != b"WAVE":
        raise FileFormatError("missing WAVE form type", path=path, offset=8)

    fs = None
    bits = None
    channels = None
    data = None
    pos = 12
    while pos + 8 <= len(blob):
        cid = blob[pos : pos + 4]
        (size,) = struct.unpack_from("<I", blob, pos + 4)
        body_start = pos + 8
        if body_start + size > len(blob):
            raise FileFormatError(
                f"chunk {cid!r} of size {size} overruns file", path=path, offset=pos
            )
        if cid == b"fmt ":
            if size < 16:
                raise FileFormatError("fmt chunk too small", path=path, offset=body_start)
            fmt_tag, channels, fs, _, _, bits = struct.unpack_from("<HHIIHH", blob, body_start)
            if fmt_tag != 1:
                raise FileFormatError(
                    f"unsupported format tag {fmt_tag} (PCM only)", path=path, offset=body_start
                )
        elif cid == b"data":
            data = blob[body_start : body_start + size]
        pos = body_start + size + (size & 1)  # chunks are word-aligned
    if fs is None:
        raise FileFormatError("no fmt chunk", path=path, offset=len(blob))
    if data is None:
        raise FileFormatError("no data chunk", path=path, offset=len(blob))
    if channels != 1 or bits != 16:
        raise FileFormatError(
            f"expected mono 16-bit PCM, got {channels} ch / {bits} bit", path=path, offset=12
        )
    if len(data) % 2:
        raise FileFormatError("odd PCM payload length", path=path, offset=len(blob) - 1)
    samples = np.frombuffer(data, dtype="<i2").astype(np.float64) / PCM16_SCALE
    return AudioWaveform(samples, fs)


def write_features(path, video: VideoFeatureStream):
    """Write frame-major float32 LE matrix plus a JSON sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(video.features.astype("<f4").tobytes())
    sidecar = {
        "frames": video.n_frames,
        "dim": video.feature_dim,
        "fps": video.frame_rate,
    }
    sidecar_path(path).write_text(json.dumps(sidecar) + "\n")


def sidecar_path(path) -> Path:
    return Path(str(path) + ".meta.json")


def read_features(path) -> VideoFeatureStream:
    path = Path(path)
    meta_path = sidecar_path(path)
    if not meta_path.exists():
        raise FileFormatError("missing sidecar", path=meta_path)
    try:
        meta = json.loads(meta_path.read_text())
        frames, dim, fps = int(meta["frames"]), int(meta["dim"]), float(meta["fps"])
    except (ValueError, KeyError, TypeError) as exc:
        raise FileFormatError(f"bad sidecar: {exc}", path=meta_path) from exc
    blob = path.read_bytes()
    expected = frames * dim * 4
    if len(blob) != expected:
        raise FileFormatError(
            f"feature payload is {len(blob)} bytes, sidecar implies {expected}",
            path=path,
            offset=min(len(blob), expected),
        )
    feats = np.frombuffer(blob, dtype="<f4").astype(np.float64).reshape(frames, dim)
    return VideoFeatureStream(feats, frame_rate=fps)


MANIFEST_COLUMNS = (
    "split",
    "example_id",
    "target_id",
    "interferer_id",
    "sir_db",
    "seed",
    "mixture_path",
    "target_path",
    "interferer_path",
    "enrolment_path",
    "video_path",
)


def write_manifest(path, records):
    """TSV manifest, one record per example."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["\t".join(MANIFEST_COLUMNS)]
    for rec in records:
        lines.append("\t".join(str(rec[col]) for col in MANIFEST_COLUMNS))
    path.write_text("\n".join(lines) + "\n")


def read_manifest(path):
    path = Path(path)
    text = path.read_text()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FileFormatError("empty manifest", path=path, offset=0)
    header = lines[0].split("\t")
    if tuple(header) != MANIFEST_COLUMNS:
        raise FileFormatError(f"unexpected manifest columns {header}", path=path, offset=0)
    records = []
    offset = len(lines[0]) + 1
    for ln in lines[1:]:
        fields = ln.split("\t")
        if len(fields) != len(MANIFEST_COLUMNS):
            raise FileFormatError(
                f"record has {len(fields)} fields, expected {len(MANIFEST_COLUMNS)}",
                path=path,
                offset=offset,
            )
        rec = dict(zip(MANIFEST_COLUMNS, fields))
        rec["sir_db"] = float(rec["sir_db"])
        rec["seed"] = int(rec["seed"])
        records.append(rec)
        offset += len(ln) + 1
    return records

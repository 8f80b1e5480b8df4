"""Experiment configuration: presets, file/env/flag layering, freezing.

Precedence, lowest to highest: preset defaults, YAML config file,
``AVTSE_*`` environment variables, explicit CLI overrides.  Nested keys use
double underscores in the environment (``AVTSE_MODEL__NORM_KIND=LN``).
Every command writes the fully resolved config next to its outputs so runs
are reproducible from that snapshot alone.
"""

from __future__ import annotations

import copy
import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .datagen.corpus import CorpusSpec
from .errors import ConfigurationError
from .model.config import ModelConfig
from .training.config import TrainConfig

ENV_PREFIX = "AVTSE_"
DEFAULT_CONDITIONS = ["MTSE", "AoTSE", "VoTSE", "MTSE_FD"]


@dataclass
class PathsConfig:
    corpus_dir: str = "corpus"
    checkpoint_dir: str = "checkpoints"
    report_dir: str = "reports"


@dataclass
class ExperimentConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    corpus: CorpusSpec = field(default_factory=CorpusSpec)
    eval_conditions: list = field(default_factory=lambda: list(DEFAULT_CONDITIONS))
    fd_rate: float = 1.0 / 3.0
    paths: PathsConfig = field(default_factory=PathsConfig)
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "train": self.train.to_dict(),
            "corpus": self.corpus.to_dict(),
            "eval_conditions": list(self.eval_conditions),
            "fd_rate": self.fd_rate,
            "paths": {
                "corpus_dir": self.paths.corpus_dir,
                "checkpoint_dir": self.paths.checkpoint_dir,
                "report_dir": self.paths.report_dir,
            },
            "seed": self.seed,
        }


PRESETS = {
    "default": {},
    # CI-speed preset: tiny clips, small network, few speakers
    "toy-8k": {
        "model": {
            "n_channels": 32,
            "hidden_dim": 16,
            "chunk_size": 25,
            "norm_kind": "gLN",
            "sample_rate": 8000,
        },
        "train": {
            "lr": 3e-3,
            "max_epochs": 40,
        },
        "corpus": {
            "n_train": 256,
            "n_val": 32,
            "n_test": 64,
            "sample_rate": 8000,
            "clip_seconds": 0.5,
            "n_speakers": 8,
            "utterances_per_speaker": 12,
        },
    },
}


def deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if key in out and isinstance(out[key], dict) and isinstance(value, dict):
            out[key] = deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def env_overrides(environ=None) -> dict:
    """Collect AVTSE_* variables into a nested override dict."""
    environ = os.environ if environ is None else environ
    out: dict = {}
    for key, raw in environ.items():
        if not key.startswith(ENV_PREFIX):
            continue
        path = key[len(ENV_PREFIX) :].lower().split("__")
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError:
            value = raw
        node = out
        for part in path[:-1]:
            node = node.setdefault(part, {})
        node[path[-1]] = value
    return out


def resolve_config(
    preset=None, config_path=None, environ=None, overrides=None
) -> ExperimentConfig:
    """Layer preset, file, environment and explicit overrides into a config."""
    if preset is not None and preset not in PRESETS:
        raise ConfigurationError(f"unknown preset {preset!r}; available: {sorted(PRESETS)}")
    data: dict = copy.deepcopy(PRESETS.get(preset or "default", {}))
    if config_path is not None:
        loaded = yaml.safe_load(Path(config_path).read_text()) or {}
        if not isinstance(loaded, dict):
            raise ConfigurationError(f"config file {config_path} must hold a mapping")
        data = deep_merge(data, loaded)
    data = deep_merge(data, env_overrides(environ))
    if overrides:
        data = deep_merge(data, overrides)
    return _build(data)


def _build(data: dict) -> ExperimentConfig:
    known = {"model", "train", "corpus", "eval_conditions", "fd_rate", "paths", "seed"}
    unknown = set(data) - known
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
    seed = data.get("seed", 0)
    model_d = dict(data.get("model", {}))
    train_d = dict(data.get("train", {}))
    corpus_d = dict(data.get("corpus", {}))
    # the experiment seed is the default for every stage seed
    train_d.setdefault("seed", seed)
    corpus_d.setdefault("seed", seed)
    try:
        model = ModelConfig(**model_d)
        train = TrainConfig(**train_d)
        corpus = CorpusSpec(**corpus_d)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from exc
    conditions = list(data.get("eval_conditions", DEFAULT_CONDITIONS))
    paths_d = data.get("paths", {})
    paths = PathsConfig(
        corpus_dir=paths_d.get("corpus_dir", "corpus"),
        checkpoint_dir=paths_d.get("checkpoint_dir", "checkpoints"),
        report_dir=paths_d.get("report_dir", "reports"),
    )
    return ExperimentConfig(
        model=model,
        train=train,
        corpus=corpus,
        eval_conditions=conditions,
        fd_rate=float(data.get("fd_rate", 1.0 / 3.0)),
        paths=paths,
        seed=seed,
    )


def freeze_config(config: ExperimentConfig, out_dir) -> Path:
    """Write the resolved config snapshot next to a command's outputs."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "resolved_config.yaml"
    path.write_text(yaml.safe_dump(config.to_dict(), sort_keys=True))
    return path

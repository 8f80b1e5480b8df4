"""Checkpoint container: parameters plus the full model configuration.

Round-trips bit-exactly: save -> load -> identical forward outputs.
"""

from __future__ import annotations

from pathlib import Path

import torch

from ..errors import FileFormatError
from .config import ModelConfig
from .network import MtseNet

FORMAT_VERSION = 1


def save_checkpoint(path, model, strategy=None, extra=None):
    """Persist a model with its config and optional training metadata."""
    payload = {
        "format_version": FORMAT_VERSION,
        "model_config": model.config.to_dict(),
        "state_dict": model.state_dict(),
        "strategy": strategy,
        "extra": extra or {},
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save(payload, path)
    return path


def load_checkpoint(path):
    """Load a checkpoint; returns (model, strategy, extra)."""
    path = Path(path)
    try:
        payload = torch.load(path, map_location="cpu", weights_only=False)
    except Exception as exc:  # torch raises various unpickling errors
        raise FileFormatError(f"not a readable checkpoint: {exc}", path=path) from exc
    if not isinstance(payload, dict) or "state_dict" not in payload:
        raise FileFormatError("checkpoint missing state_dict", path=path)
    config = ModelConfig.from_dict(payload["model_config"])
    model = MtseNet(config)
    sample = next(iter(payload["state_dict"].values()))
    model.to(sample.dtype)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, payload.get("strategy"), payload.get("extra", {})

"""The four inference conditions and batch evaluation against a checkpoint.

Zeroing semantics depend on how the checkpoint was trained: a dropout-
trained model zeroes the missing modality's embedding (its clue network is
bypassed), while standard- and multi-task-trained models zero the raw input
stream and still run it through the clue network.  Frame-drop corruption is
applied per item with a deterministic substream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import torch

from ..datagen.mixing import burst_frame_drop
from ..errors import ConfigurationError, InvalidInputError
from ..model.network import AuxInput
from ..training.config import STRATEGIES
from .metrics import si_sdri

CONDITION_KINDS = ("MTSE", "AoTSE", "VoTSE", "MTSE_FD")
_FD_TAG = 31


@dataclass(frozen=True)
class InferenceCondition:
    """Evaluation condition plus the training strategy it must match."""

    kind: str
    strategy_trained: str
    fd_rate: float = 1.0 / 3.0

    def __post_init__(self):
        if self.kind not in CONDITION_KINDS:
            raise ConfigurationError(
                f"unknown condition {self.kind!r}; expected one of {CONDITION_KINDS}"
            )
        if self.strategy_trained not in STRATEGIES:
            raise ConfigurationError(f"unknown strategy {self.strategy_trained!r}")
        if self.kind == "MTSE_FD" and not 0.0 < self.fd_rate < 1.0:
            raise ConfigurationError(f"fd_rate must be in (0, 1), got {self.fd_rate}")

    @property
    def drops_by_embedding(self) -> bool:
        return self.strategy_trained == "MDT"


@dataclass
class ConditionReport:
    """Per-example SI-SDR improvements plus their mean and sample SD."""

    condition: str
    strategy: str
    model_tag: dict
    values: list = field(default_factory=list)

    @property
    def mean(self) -> float:
        return float(np.mean(self.values)) if self.values else math.nan

    @property
    def sd(self) -> float:
        if len(self.values) < 2:
            return math.nan
        return float(np.std(self.values, ddof=1))


def condition_aux(example, condition: InferenceCondition, item_rng, dtype=torch.float32):
    """Build the AuxInput for one example under a condition.

    The example's streams are copied, never mutated.
    """
    enrolment = torch.as_tensor(example.enrolment.samples, dtype=dtype).unsqueeze(0)
    video = torch.as_tensor(example.video.features, dtype=dtype).unsqueeze(0)
    kind = condition.kind
    if kind == "MTSE":
        return AuxInput(enrolment=enrolment, video=video)
    if kind == "MTSE_FD":
        dropped = burst_frame_drop(example.video, condition.fd_rate, item_rng)
        video = torch.as_tensor(dropped.features, dtype=dtype).unsqueeze(0)
        return AuxInput(enrolment=enrolment, video=video)
    if kind == "AoTSE":
        if condition.drops_by_embedding:
            return AuxInput(enrolment=enrolment, use_video=False)
        return AuxInput(enrolment=enrolment, video=torch.zeros_like(video))
    # VoTSE
    if condition.drops_by_embedding:
        return AuxInput(video=video, use_audio=False)
    return AuxInput(enrolment=torch.zeros_like(enrolment), video=video)


def extract(model, example, condition: InferenceCondition, item_rng=None):
    """Run one example through the model under a condition; returns (estimate, diagnostics)."""
    if item_rng is None:
        item_rng = np.random.default_rng(0)
    mixture = torch.as_tensor(example.mixture.samples, dtype=torch.float32).unsqueeze(0)
    aux = condition_aux(example, condition, item_rng)
    with torch.no_grad():
        est, diag = model(mixture, aux)
    return est[0].numpy(), diag


def evaluate_condition(
    model, examples, condition: InferenceCondition, strategy=None, seed=0, model_tag=None
) -> ConditionReport:
    """Aggregate SI-SDRi of ``model`` over ``examples`` under ``condition``.

    ``strategy`` is the checkpoint's training-strategy tag; it must match
    the condition's ``strategy_trained``.
    """
    if strategy is not None and strategy != condition.strategy_trained:
        raise ConfigurationError(
            f"condition expects a {condition.strategy_trained}-trained model, got {strategy}"
        )
    if not examples:
        raise InvalidInputError("no examples to evaluate")
    report = ConditionReport(
        condition=condition.kind,
        strategy=condition.strategy_trained,
        model_tag=model_tag or {},
    )
    for index, example in enumerate(examples):
        item_rng = np.random.default_rng(np.random.SeedSequence([seed, _FD_TAG, index]))
        estimate, _ = extract(model, example, condition, item_rng)
        report.values.append(
            si_sdri(example.mixture.samples, estimate, example.target.samples)
        )
    return report

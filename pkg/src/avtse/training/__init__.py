from .config import TrainConfig
from .losses import (
    Batch,
    LossBreakdown,
    ModalityMask,
    loss_mdt,
    loss_mtt,
    loss_st,
    sample_modality_mask,
    si_sdr,
)
from .loop import EpochRecord, TrainResult, train

__all__ = [
    "TrainConfig",
    "Batch",
    "LossBreakdown",
    "ModalityMask",
    "loss_st",
    "loss_mtt",
    "loss_mdt",
    "sample_modality_mask",
    "si_sdr",
    "EpochRecord",
    "TrainResult",
    "train",
]

"""Optimization loop shared by the three strategies.

Adam with coupled L2 weight decay, global gradient-norm clipping, plateau
learning-rate decay driven by the validation loss, early stopping, and
per-epoch dynamic remixing of the training split.  The best-validation
parameters are returned.  Validation masks (dropout strategy) are drawn
from a fixed substream each epoch so the validation loss stays comparable
across epochs.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, asdict

import numpy as np
import torch

from ..datagen.corpus import Corpus, dynamic_remix
from ..errors import TrainingError
from ..model.config import ModelConfig
from ..model.network import MtseNet
from .config import TrainConfig
from .losses import Batch, loss_mdt, loss_mtt, loss_st, sample_modality_mask

_TRAIN_TAG = 21
_VAL_TAG = 22


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    lr: float


@dataclass
class TrainResult:
    model: MtseNet
    history: list
    best_epoch: int
    best_val_loss: float
    trainer_state: dict


def sample_masks(rng, n):
    """Per-item modality masks for one batch (patchable in tests)."""
    return [sample_modality_mask(rng) for _ in range(n)]


def _strategy_loss(strategy, batch, model, mask_rng=None):
    if strategy == "ST":
        return loss_st(batch, model)
    if strategy == "MTT":
        return loss_mtt(batch, model)
    return loss_mdt(batch, model, masks=sample_masks(mask_rng, len(batch)))


def _batches(split, order, batch_size, dtype=torch.float32):
    for start in range(0, len(order), batch_size):
        idx = order[start : start + batch_size]
        yield Batch(
            mixture=torch.as_tensor(split.mixture[idx], dtype=dtype),
            target=torch.as_tensor(split.target[idx], dtype=dtype),
            enrolment=torch.as_tensor(split.enrolment[idx], dtype=dtype),
            video=torch.as_tensor(split.video[idx], dtype=dtype),
        )


def _epoch_loss(strategy, split, model, batch_size, mask_rng):
    """Forward-only strategy loss over a frozen split."""
    model.eval()
    total = 0.0
    with torch.no_grad():
        order = np.arange(len(split))
        for batch in _batches(split, order, batch_size):
            breakdown = _strategy_loss(strategy, batch, model, mask_rng)
            total += float(breakdown.l_total) * len(batch)
    return total / len(split)


def train(
    model_config: ModelConfig,
    train_config: TrainConfig,
    corpus: Corpus,
    dump_dir=None,
    resume=None,
    progress=None,
) -> TrainResult:
    """Train a fresh (or resumed) model on the corpus train split.

    Returns the best-validation model together with the per-epoch history.
    Raises TrainingError with a diagnostic dump path if the loss goes
    non-finite.
    """
    cfg = train_config
    torch.manual_seed(cfg.seed)
    model = MtseNet(model_config)
    optimizer = torch.optim.Adam(
        model.parameters(), lr=cfg.lr, weight_decay=cfg.weight_decay
    )
    scheduler = torch.optim.lr_scheduler.ReduceLROnPlateau(
        optimizer, mode="min", factor=cfg.plateau_factor, patience=cfg.plateau_patience
    )

    history = []
    best_val = float("inf")
    best_epoch = 0
    best_state = None
    start_epoch = 1
    if resume:
        model.load_state_dict(resume["model_state"])
        optimizer.load_state_dict(resume["optimizer_state"])
        scheduler.load_state_dict(resume["scheduler_state"])
        history = [EpochRecord(**r) for r in resume.get("history", [])]
        best_val = resume.get("best_val_loss", best_val)
        best_epoch = resume.get("best_epoch", 0)
        best_state = copy.deepcopy(resume.get("best_model_state", resume["model_state"]))
        start_epoch = resume["epoch"] + 1

    train_split = corpus.materialize("train")
    val_split = corpus.materialize("val")
    batch_size = cfg.effective_batch_size

    for epoch in range(start_epoch, cfg.max_epochs + 1):
        epoch_rng = np.random.default_rng(
            np.random.SeedSequence([cfg.seed, _TRAIN_TAG, epoch])
        )
        split = train_split
        if cfg.dynamic_mixing:
            split = dynamic_remix(train_split, epoch, cfg.seed, corpus.spec.sir_range)

        model.train()
        order = epoch_rng.permutation(len(split))
        running = 0.0
        for batch_index, batch in enumerate(_batches(split, order, batch_size)):
            breakdown = _strategy_loss(cfg.strategy, batch, model, epoch_rng)
            loss = breakdown.l_total
            if not torch.isfinite(loss):
                dump = _dump_state(dump_dir, model, optimizer, epoch, batch_index, batch)
                raise TrainingError(
                    f"non-finite loss at epoch {epoch}, batch {batch_index}"
                    + (f"; state dumped to {dump}" if dump else "")
                )
            optimizer.zero_grad()
            loss.backward()
            torch.nn.utils.clip_grad_norm_(model.parameters(), cfg.grad_clip_norm)
            optimizer.step()
            running += float(loss.detach()) * len(batch)
        train_loss = running / len(split)

        val_rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, _VAL_TAG]))
        val_loss = _epoch_loss(cfg.strategy, val_split, model, batch_size, val_rng)
        scheduler.step(val_loss)
        lr = optimizer.param_groups[0]["lr"]
        history.append(EpochRecord(epoch=epoch, train_loss=train_loss, val_loss=val_loss, lr=lr))
        if progress:
            progress(history[-1])

        if val_loss < best_val:
            best_val = val_loss
            best_epoch = epoch
            best_state = copy.deepcopy(model.state_dict())
        elif epoch - best_epoch >= cfg.early_stop_patience:
            break

    last_state = copy.deepcopy(model.state_dict())
    if best_state is not None:
        model.load_state_dict(best_state)
    model.eval()
    trainer_state = {
        "epoch": history[-1].epoch if history else 0,
        "best_epoch": best_epoch,
        "best_val_loss": best_val,
        "history": [asdict(r) for r in history],
        "model_state": last_state,
        "best_model_state": copy.deepcopy(model.state_dict()),
        "optimizer_state": optimizer.state_dict(),
        "scheduler_state": scheduler.state_dict(),
    }
    return TrainResult(
        model=model,
        history=history,
        best_epoch=best_epoch,
        best_val_loss=best_val,
        trainer_state=trainer_state,
    )


def _dump_state(dump_dir, model, optimizer, epoch, batch_index, batch):
    if dump_dir is None:
        return None
    from pathlib import Path

    path = Path(dump_dir) / f"nonfinite_epoch{epoch}_batch{batch_index}.pt"
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save(
        {
            "epoch": epoch,
            "batch_index": batch_index,
            "model_state": model.state_dict(),
            "optimizer_state": optimizer.state_dict(),
            "batch": {
                "mixture": batch.mixture,
                "target": batch.target,
                "enrolment": batch.enrolment,
                "video": batch.video,
            },
        },
        path,
    )
    return path


def write_history(path, history):
    """Line-per-epoch TSV: epoch, train_loss, val_loss, lr."""
    from pathlib import Path

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["epoch\ttrain_loss\tval_loss\tlr"]
    for rec in history:
        lines.append(f"{rec.epoch}\t{rec.train_loss:.6f}\t{rec.val_loss:.6f}\t{rec.lr:.6g}")
    path.write_text("\n".join(lines) + "\n")

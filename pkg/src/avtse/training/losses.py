"""SI-SDR and the three training objectives (standard, multi-task, dropout).

The SI-SDR of an estimate against a reference projects the estimate onto
the reference (alpha = <est, ref> / ||ref||^2) and compares projection
energy against residual energy on a dB scale.  The energy ratio is floored
so values are finite and capped at +/- 10*log10(1/eps); the floor keeps the
value exactly scale-invariant in the estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import torch

from ..errors import InvalidInputError

SI_SDR_EPS = 1e-8


def si_sdr_cap(eps=SI_SDR_EPS):
    """Largest attainable |SI-SDR| in dB for a given floor."""
    return 10.0 * math.log10(1.0 / eps)


def si_sdr(estimate, reference, eps=SI_SDR_EPS):
    """Scale-invariant signal-to-distortion ratio in dB.

    Args:
        estimate: [T] or [B, T] tensor.
        reference: same shape; must not be all-zero.
        eps: ratio floor; caps the result at +/- 10*log10(1/eps).

    Returns:
        Scalar (1-D inputs) or [B] tensor of dB values.
    """
    if estimate.shape != reference.shape:
        raise InvalidInputError(
            f"length mismatch: estimate {tuple(estimate.shape)} vs reference {tuple(reference.shape)}"
        )
    squeeze = estimate.dim() == 1
    if squeeze:
        estimate = estimate.unsqueeze(0)
        reference = reference.unsqueeze(0)

    ref_energy = (reference**2).sum(dim=-1)
    if bool((ref_energy == 0).any()):
        raise InvalidInputError("reference signal is all-zero")

    dot = (estimate * reference).sum(dim=-1)
    proj_energy = dot**2 / ref_energy  # ||alpha * ref||^2
    scaled_ref = (dot / ref_energy).unsqueeze(-1) * reference
    err_energy = ((estimate - scaled_ref) ** 2).sum(dim=-1)

    tiny = torch.finfo(estimate.dtype).tiny
    ratio = proj_energy / (err_energy + eps * proj_energy + tiny)
    value = 10.0 * torch.log10(torch.clamp(ratio, min=eps))
    return value.squeeze(0) if squeeze else value


def neg_si_sdr(estimate, reference, eps=SI_SDR_EPS):
    """Mean negative SI-SDR over a batch (the training loss)."""
    return -si_sdr(estimate, reference, eps).mean()


@dataclass
class ModalityMask:
    """Which auxiliary modalities one training example keeps."""

    use_audio: bool
    use_video: bool

    def __post_init__(self):
        if not (self.use_audio or self.use_video):
            raise InvalidInputError("both modalities dropped; at least one must be kept")


def sample_modality_mask(rng) -> ModalityMask:
    """Draw a mask: both / video-only / audio-only, each with probability 1/3."""
    case = int(rng.integers(3))
    if case == 0:
        return ModalityMask(use_audio=True, use_video=True)
    if case == 1:
        return ModalityMask(use_audio=False, use_video=True)
    return ModalityMask(use_audio=True, use_video=False)


@dataclass
class Batch:
    """Tensors for one optimization step (all items equal length)."""

    mixture: torch.Tensor  # [B, T]
    target: torch.Tensor  # [B, T]
    enrolment: torch.Tensor  # [B, T_a]
    video: torch.Tensor  # [B, T_v, D_v]

    def __len__(self):
        return self.mixture.shape[0]

    def to(self, dtype):
        return Batch(
            self.mixture.to(dtype),
            self.target.to(dtype),
            self.enrolment.to(dtype),
            self.video.to(dtype),
        )


@dataclass
class LossBreakdown:
    """Loss terms of one step; l_a / l_v only exist for multi-task training."""

    l_total: torch.Tensor
    l_av: torch.Tensor
    l_a: torch.Tensor | None = None
    l_v: torch.Tensor | None = None


def loss_st(batch: Batch, model) -> LossBreakdown:
    """Standard training: one pass with both auxiliary streams."""
    from ..model.network import AuxInput

    estimate, _ = model(batch.mixture, AuxInput(enrolment=batch.enrolment, video=batch.video))
    l_av = neg_si_sdr(estimate, batch.target)
    return LossBreakdown(l_total=l_av, l_av=l_av)


def loss_mtt(batch: Batch, model) -> LossBreakdown:
    """Multi-task training: three passes (both / audio-only / video-only).

    The dropped stream is zeroed at the input (an all-zero video feature
    stream, an all-zero enrolment waveform) and still runs through its clue
    network.  The total is the exact arithmetic mean of the three terms.
    """
    from ..model.network import AuxInput

    est_av, _ = model(batch.mixture, AuxInput(enrolment=batch.enrolment, video=batch.video))
    est_a, _ = model(
        batch.mixture,
        AuxInput(enrolment=batch.enrolment, video=torch.zeros_like(batch.video)),
    )
    est_v, _ = model(
        batch.mixture,
        AuxInput(enrolment=torch.zeros_like(batch.enrolment), video=batch.video),
    )
    l_av = neg_si_sdr(est_av, batch.target)
    l_a = neg_si_sdr(est_a, batch.target)
    l_v = neg_si_sdr(est_v, batch.target)
    return LossBreakdown(l_total=(l_av + l_a + l_v) / 3.0, l_av=l_av, l_a=l_a, l_v=l_v)


def loss_mdt(batch: Batch, model, rng=None, masks=None) -> LossBreakdown:
    """Modality-dropout training: per-item masks, single pass.

    A dropped modality's embedding is replaced by zeros; its clue network
    is not invoked for those items.  ``masks`` overrides sampling (used for
    deterministic gradient checks); otherwise one mask per item is drawn
    from ``rng``.
    """
    from ..model.network import AuxInput

    if masks is None:
        if rng is None:
            raise InvalidInputError("loss_mdt needs either an rng or explicit masks")
        masks = [sample_modality_mask(rng) for _ in range(len(batch))]
    if len(masks) != len(batch):
        raise InvalidInputError(f"expected {len(batch)} masks, got {len(masks)}")
    use_audio = [m.use_audio for m in masks]
    use_video = [m.use_video for m in masks]
    estimate, _ = model(
        batch.mixture,
        AuxInput(
            enrolment=batch.enrolment,
            video=batch.video,
            use_audio=use_audio,
            use_video=use_video,
        ),
    )
    l_av = neg_si_sdr(estimate, batch.target)
    return LossBreakdown(l_total=l_av, l_av=l_av)


def si_sdr_numpy(estimate: np.ndarray, reference: np.ndarray, eps=SI_SDR_EPS) -> float:
    """Convenience wrapper applying :func:`si_sdr` to 1-D numpy arrays."""
    value = si_sdr(
        torch.as_tensor(np.asarray(estimate, dtype=np.float64)),
        torch.as_tensor(np.asarray(reference, dtype=np.float64)),
        eps,
    )
    return float(value)

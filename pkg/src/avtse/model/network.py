"""The full extraction network and its forward contract.

Pipeline: encode -> DNN1 -> attentive combination of clue embeddings ->
multiplicative fusion -> DNN2 -> bounded mask -> masked decode, trimmed to
the input length.  A dropped modality contributes an all-zero embedding and
its clue network is not invoked for the dropped items.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn as nn

from ..errors import InvalidInputError
from .attention import AttentiveCombiner
from .clue import AudioClueNet, VideoClueNet
from .coder import ConvDecoder, ConvEncoder
from .config import ModelConfig
from .dprnn import DPRNNStack


def fuse(mix_repr, embedding):
    """Element-wise multiplicative fusion of representation and embedding."""
    if mix_repr.shape != embedding.shape:
        raise InvalidInputError(
            f"fuse shape mismatch: {tuple(mix_repr.shape)} vs {tuple(embedding.shape)}"
        )
    return mix_repr * embedding


def _as_flags(value, batch, device):
    """Normalize a per-item flag spec (None/bool/sequence/tensor) to a bool tensor."""
    if value is None:
        return None
    if isinstance(value, bool):
        return torch.full((batch,), value, dtype=torch.bool, device=device)
    flags = torch.as_tensor(value, dtype=torch.bool, device=device)
    if flags.shape != (batch,):
        raise InvalidInputError(f"flags must have shape [{batch}], got {tuple(flags.shape)}")
    return flags


@dataclass
class AuxInput:
    """Auxiliary conditioning for one forward pass.

    Either raw inputs (enrolment waveform, video feature stream) or
    precomputed embeddings may be supplied; ``use_audio``/``use_video``
    drop a modality per item (its embedding becomes all-zero and the clue
    network is skipped for those items).
    """

    enrolment: torch.Tensor | None = None  # [B, T_a]
    video: torch.Tensor | None = None  # [B, T_v, D_v]
    audio_embedding: torch.Tensor | None = None  # [B, N], overrides enrolment
    video_embedding: torch.Tensor | None = None  # [B, N, T_M], overrides video
    use_audio: object = None  # None | bool | [B] bools
    use_video: object = None


@dataclass
class ForwardDiagnostics:
    """Side channel returned by the forward pass."""

    weights: torch.Tensor  # [B, 2, T_M], (audio, video) convex weights
    mask: torch.Tensor  # [B, N, T_M]
    audio_items: int  # items actually run through AudioClueNet
    video_items: int


class MtseNet(nn.Module):
    """Multi-modal target speaker extraction network."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        n = config.n_channels
        self.encoder = ConvEncoder(n, config.kernel_samples, config.stride_samples)
        self.decoder = ConvDecoder(n, config.kernel_samples, config.stride_samples)
        self.dnn1 = DPRNNStack(
            n, config.hidden_dim, config.chunk_size, config.layers_per_block,
            config.norm_kind, config.causal,
        )
        self.dnn2 = DPRNNStack(
            n, config.hidden_dim, config.chunk_size, config.layers_per_block,
            config.norm_kind, config.causal,
        )
        self.audio_clue = AudioClueNet(config)
        self.video_clue = VideoClueNet(config)
        self.combiner = AttentiveCombiner(n)
        self.mask_head = nn.Conv1d(n, n, kernel_size=1)

    def embed_audio(self, enrolment):
        """Enrolment waveform [B, T_a] -> embedding [B, N]."""
        return self.audio_clue(enrolment)

    def embed_video(self, video, target_frames):
        """Video features [B, T_v, D_v] -> embedding [B, N, target_frames]."""
        return self.video_clue(video, target_frames)

    def _resolve_audio(self, aux, batch, device, dtype):
        n = self.config.n_channels
        flags = _as_flags(aux.use_audio, batch, device)
        has_source = aux.audio_embedding is not None or aux.enrolment is not None
        if flags is None:
            flags = torch.full((batch,), has_source, dtype=torch.bool, device=device)
        active = int(flags.sum())
        if active == 0:
            return torch.zeros(batch, n, device=device, dtype=dtype), 0
        if aux.audio_embedding is not None:
            emb = aux.audio_embedding * flags.unsqueeze(1).to(dtype)
            return emb, 0
        if aux.enrolment is None:
            raise InvalidInputError("use_audio set but no enrolment or audio embedding given")
        if active == batch:
            return self.audio_clue(aux.enrolment), batch
        emb = torch.zeros(batch, n, device=device, dtype=dtype)
        idx = flags.nonzero(as_tuple=True)[0]
        emb[idx] = self.audio_clue(aux.enrolment[idx])
        return emb, active

    def _resolve_video(self, aux, batch, t_m, device, dtype):
        n = self.config.n_channels
        flags = _as_flags(aux.use_video, batch, device)
        has_source = aux.video_embedding is not None or aux.video is not None
        if flags is None:
            flags = torch.full((batch,), has_source, dtype=torch.bool, device=device)
        active = int(flags.sum())
        if active == 0:
            return torch.zeros(batch, n, t_m, device=device, dtype=dtype), 0
        if aux.video_embedding is not None:
            emb = aux.video_embedding * flags.view(-1, 1, 1).to(dtype)
            return emb, 0
        if aux.video is None:
            raise InvalidInputError("use_video set but no video stream or video embedding given")
        if active == batch:
            return self.video_clue(aux.video, t_m), batch
        emb = torch.zeros(batch, n, t_m, device=device, dtype=dtype)
        idx = flags.nonzero(as_tuple=True)[0]
        emb[idx] = self.video_clue(aux.video[idx], t_m)
        return emb, active

    def forward(self, mixture, aux: AuxInput):
        """Extract the target from ``mixture`` [B, T].

        Returns (estimate [B, T], ForwardDiagnostics).
        """
        if mixture.dim() != 2:
            raise InvalidInputError(f"mixture must be [B, T], got {tuple(mixture.shape)}")
        no_audio = aux.audio_embedding is None and aux.enrolment is None and aux.use_audio is None
        no_video = aux.video_embedding is None and aux.video is None and aux.use_video is None
        if no_audio and no_video:
            raise InvalidInputError(
                "no auxiliary modality given; pass explicit use flags to run with zero embeddings"
            )
        batch, n_samples = mixture.shape
        feats = self.encoder(mixture)  # X: [B, N, T_M]
        t_m = feats.shape[2]
        mix_repr = self.dnn1(feats)  # H

        audio_emb, audio_items = self._resolve_audio(aux, batch, feats.device, feats.dtype)
        video_emb, video_items = self._resolve_video(aux, batch, t_m, feats.device, feats.dtype)

        combined, weights = self.combiner(mix_repr, audio_emb, video_emb)
        fused = fuse(mix_repr, combined)
        mask = torch.sigmoid(self.mask_head(self.dnn2(fused)))
        estimate = self.decoder(feats * mask, trim_to=n_samples)
        return estimate, ForwardDiagnostics(
            weights=weights, mask=mask, audio_items=audio_items, video_items=video_items
        )

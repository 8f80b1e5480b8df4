"""Attentive combination of the audio and video clue embeddings.

Per frame t, each modality is scored against the mixture representation
H_t with a shared additive-attention body,

    e_q,t = w^T tanh(W H_t + V E_q + b),    q in {audio, video},

and the two scores are turned into convex weights with a sharpened two-way
softmax.  The combined embedding is the weighted sum of the per-modality
embeddings.
"""

from __future__ import annotations

import torch
import torch.nn as nn

from ..errors import InvalidInputError


def combination_weights(score_audio, score_video, gamma):
    """Two-way softmax over sharpened scores.

    Returns (w_audio, w_video) with w_audio + w_video = 1 elementwise;
    computed as a sigmoid of the score gap for numerical stability.
    """
    w_audio = torch.sigmoid(gamma * (score_audio - score_video))
    return w_audio, 1.0 - w_audio


class AttentiveCombiner(nn.Module):
    """Cross-attention weighting of a static audio and a per-frame video embedding.

    The score parameters (w, W, V, b) are shared across both modalities;
    ``gamma`` is a fixed sharpening factor.
    """

    def __init__(self, n_channels, gamma=2.0):
        super().__init__()
        if gamma <= 0:
            raise InvalidInputError(f"gamma must be positive, got {gamma}")
        self.gamma = gamma
        self.mix_proj = nn.Linear(n_channels, n_channels, bias=False)  # W
        self.clue_proj = nn.Linear(n_channels, n_channels, bias=False)  # V
        self.score_bias = nn.Parameter(torch.zeros(n_channels))  # b
        self.score_vec = nn.Parameter(torch.empty(n_channels))  # w
        nn.init.normal_(self.score_vec, std=n_channels**-0.5)

    def scores(self, mix_repr, clue):
        """e_q,t for one modality.

        Args:
            mix_repr: [B, N, T] mixture hidden representation.
            clue: [B, N] (broadcast over frames) or [B, N, T].

        Returns:
            [B, T] scores.
        """
        proj = self.mix_proj(mix_repr.transpose(1, 2))  # [B, T, N]
        if clue.dim() == 2:
            clue_term = self.clue_proj(clue).unsqueeze(1)  # [B, 1, N]
        else:
            clue_term = self.clue_proj(clue.transpose(1, 2))  # [B, T, N]
        hidden = torch.tanh(proj + clue_term + self.score_bias)
        return hidden @ self.score_vec  # [B, T]

    def forward(self, mix_repr, audio_embedding, video_embedding):
        """Combine embeddings.

        Args:
            mix_repr: [B, N, T].
            audio_embedding: [B, N] time-invariant.
            video_embedding: [B, N, T] time-varying.

        Returns:
            combined [B, N, T] and weights [B, 2, T] ordered (audio, video).
        """
        B, N, T = mix_repr.shape
        if audio_embedding.shape != (B, N):
            raise InvalidInputError(
                f"audio embedding must be [B, N]={B, N}, got {tuple(audio_embedding.shape)}"
            )
        if video_embedding.shape != (B, N, T):
            raise InvalidInputError(
                f"video embedding must be [B, N, T]={B, N, T}, got {tuple(video_embedding.shape)}"
            )
        e_audio = self.scores(mix_repr, audio_embedding)
        e_video = self.scores(mix_repr, video_embedding)
        w_audio, w_video = combination_weights(e_audio, e_video, self.gamma)
        combined = w_audio.unsqueeze(1) * audio_embedding.unsqueeze(2) + w_video.unsqueeze(
            1
        ) * video_embedding
        weights = torch.stack([w_audio, w_video], dim=1)  # [B, 2, T]
        return combined, weights

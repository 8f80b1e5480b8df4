"""Dual-path recurrent layers over half-overlapping chunks.

Each layer cascades an intra-chunk recurrence (always bi-directional) and an
inter-chunk recurrence (bi-directional when non-causal, uni-directional when
causal).  Both recurrences are followed by a linear projection, the
configured normalization, and a residual connection.

A causal stack can also run incrementally: :class:`StreamingState` carries
the inter-chunk LSTM hidden state, the cumulative-norm running moments, and
the partially overlap-added output tail between calls.
"""

from __future__ import annotations

import torch
import torch.nn as nn

from ..errors import ConfigurationError, InvalidInputError
from .chunking import chunk_count, hop_size, overlap_add, segment
from .norms import ChunkNorm


class DPRNNLayer(nn.Module):
    """One intra+inter dual-path layer on chunked tensors [B, N, K, S]."""

    def __init__(self, n_channels, hidden_dim, norm_kind, causal):
        super().__init__()
        self.causal = causal
        self.intra_rnn = nn.LSTM(n_channels, hidden_dim, batch_first=True, bidirectional=True)
        self.intra_proj = nn.Linear(2 * hidden_dim, n_channels)
        self.intra_norm = ChunkNorm(norm_kind, n_channels)
        inter_directions = 1 if causal else 2
        self.inter_rnn = nn.LSTM(
            n_channels, hidden_dim, batch_first=True, bidirectional=not causal
        )
        self.inter_proj = nn.Linear(inter_directions * hidden_dim, n_channels)
        self.inter_norm = ChunkNorm(norm_kind, n_channels)

    def forward(self, x, state=None):
        y, _ = self._run(x, state, track=False)
        return y

    def step(self, x, state=None):
        """Streaming variant: returns (output, carried state)."""
        if not self.causal:
            raise ConfigurationError("streaming requires a causal layer")
        return self._run(x, state, track=True)

    def _run(self, x, state, track):
        if x.dim() != 4:
            raise InvalidInputError(f"expected chunked input [B, N, K, S], got {tuple(x.shape)}")
        B, N, K, S = x.shape
        state = state or {}
        new_state = {}

        # intra-chunk: [B*S, K, N]
        seq = x.permute(0, 3, 2, 1).reshape(B * S, K, N)
        out, _ = self.intra_rnn(seq)
        out = self.intra_proj(out)
        out = out.reshape(B, S, K, N).permute(0, 3, 2, 1)
        if track:
            new_state["intra_moments"] = self.intra_norm.updated_moments(
                out, state.get("intra_moments")
            )
        out = self.intra_norm(out, state.get("intra_moments"))
        x = x + out

        # inter-chunk: [B*K, S, N]
        seq = x.permute(0, 2, 3, 1).reshape(B * K, S, N)
        out, hidden = self.inter_rnn(seq, state.get("inter_hidden"))
        out = self.inter_proj(out)
        out = out.reshape(B, K, S, N).permute(0, 3, 1, 2)
        if track:
            new_state["inter_hidden"] = hidden
            new_state["inter_moments"] = self.inter_norm.updated_moments(
                out, state.get("inter_moments")
            )
        out = self.inter_norm(out, state.get("inter_moments"))
        return x + out, (new_state if track else None)


class DPRNNStack(nn.Module):
    """Segmentation, a stack of dual-path layers, and overlap-add."""

    def __init__(self, n_channels, hidden_dim, chunk_size, n_layers, norm_kind, causal):
        super().__init__()
        self.chunk_size = chunk_size
        self.causal = causal
        self.layers = nn.ModuleList(
            DPRNNLayer(n_channels, hidden_dim, norm_kind, causal) for _ in range(n_layers)
        )

    def forward(self, x):
        """[B, N, T] -> [B, N, T]."""
        chunks, n_frames = segment(x, self.chunk_size)
        for layer in self.layers:
            chunks = layer(chunks)
        return overlap_add(chunks, n_frames)

    def stream_start(self):
        if not self.causal:
            raise ConfigurationError("streaming requires a causal stack")
        return StreamingState(n_layers=len(self.layers))

    def stream_step(self, x, state):
        """Consume [B, N, t] new frames; emit every frame whose chunks are complete."""
        return _stream_step(self, x, state)

    def stream_flush(self, state):
        """Complete the final (zero-padded) chunks and emit the remaining frames."""
        return _stream_flush(self, state)


class StreamingState:
    """Carried state for incremental causal processing; single-owner."""

    def __init__(self, n_layers):
        self.layer_states = [None] * n_layers
        self.in_tail = None  # [B, N, t] frames not yet covered by a complete chunk
        self.out_sum = None  # [B, N, t'] partial overlap-add sums from frame `emitted`
        self.out_count = None  # [1, 1, t']
        self.chunks_done = 0
        self.total_in = 0
        self.emitted = 0


def _run_chunks(stack, chunks, state):
    for i, layer in enumerate(stack.layers):
        chunks, state.layer_states[i] = layer.step(chunks, state.layer_states[i])
    return chunks


def _accumulate(stack, state, chunks, first_chunk_index):
    """Overlap-add new chunks into the pending output buffer."""
    B, N, K, S = chunks.shape
    p = hop_size(K)
    span = (S - 1) * p + K
    added = overlap_add_raw(chunks)
    counts = overlap_add_raw(torch.ones(1, 1, K, S, dtype=chunks.dtype, device=chunks.device))
    start = first_chunk_index * p  # global frame of the first new chunk
    offset = start - state.emitted
    need = offset + span
    if state.out_sum is None:
        state.out_sum = torch.zeros(B, N, need, dtype=chunks.dtype, device=chunks.device)
        state.out_count = torch.zeros(1, 1, need, dtype=chunks.dtype, device=chunks.device)
    elif state.out_sum.shape[2] < need:
        pad = need - state.out_sum.shape[2]
        state.out_sum = torch.nn.functional.pad(state.out_sum, (0, pad))
        state.out_count = torch.nn.functional.pad(state.out_count, (0, pad))
    state.out_sum[:, :, offset : offset + span] += added
    state.out_count[:, :, offset : offset + span] += counts


def overlap_add_raw(chunks):
    """Overlap-add without count normalization or trimming: [B,N,K,S] -> [B,N,(S-1)P+K]."""
    B, N, K, S = chunks.shape
    p = hop_size(K)
    span = (S - 1) * p + K
    return torch.nn.functional.fold(
        chunks.reshape(B, N * K, S),
        output_size=(1, span),
        kernel_size=(1, K),
        stride=(1, p),
    ).reshape(B, N, span)


def _emit(state, upto, like=None):
    """Pop frames [emitted, upto) from the pending buffer."""
    n = upto - state.emitted
    if n <= 0:
        ref = state.out_sum if state.out_sum is not None else like
        return ref[:, :, :0]
    out = state.out_sum[:, :, :n] / state.out_count[:, :, :n]
    state.out_sum = state.out_sum[:, :, n:]
    state.out_count = state.out_count[:, :, n:]
    state.emitted = upto
    return out


def _stream_step(stack, x, state):
    if x.dim() != 3:
        raise InvalidInputError(f"stream_step expects [B, N, t], got {tuple(x.shape)}")
    K = stack.chunk_size
    p = hop_size(K)
    combined = x if state.in_tail is None else torch.cat([state.in_tail, x], dim=2)
    state.total_in += x.shape[2]
    t_loc = combined.shape[2]
    n_new = (t_loc - K) // p + 1 if t_loc >= K else 0
    if n_new > 0:
        chunks = combined[:, :, : (n_new - 1) * p + K].unfold(2, K, p).permute(0, 1, 3, 2)
        chunks = _run_chunks(stack, chunks.contiguous(), state)
        _accumulate(stack, state, chunks, state.chunks_done)
        state.chunks_done += n_new
        state.in_tail = combined[:, :, n_new * p :]
    else:
        state.in_tail = combined
    return _emit(state, state.chunks_done * p, like=x), state


def _stream_flush(stack, state):
    if state.total_in == 0:
        raise InvalidInputError("stream_flush before any input")
    K = stack.chunk_size
    p = hop_size(K)
    total_chunks = chunk_count(state.total_in, K)
    remaining = total_chunks - state.chunks_done
    if remaining > 0:
        span = (remaining - 1) * p + K
        tail = state.in_tail
        if tail is None or tail.shape[2] < span:
            ref = tail if tail is not None else state.out_sum
            pad_to = span - (0 if tail is None else tail.shape[2])
            filler = torch.zeros(
                ref.shape[0], ref.shape[1], pad_to, dtype=ref.dtype, device=ref.device
            )
            tail = filler if tail is None else torch.cat([tail, filler], dim=2)
        chunks = tail[:, :, :span].unfold(2, K, p).permute(0, 1, 3, 2)
        chunks = _run_chunks(stack, chunks.contiguous(), state)
        _accumulate(stack, state, chunks, state.chunks_done)
        state.chunks_done = total_chunks
    state.in_tail = None
    return _emit(state, state.total_in)

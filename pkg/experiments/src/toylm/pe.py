"""Positional information for the toy decoder.

Additive biases are indexed [query, key] and only causal entries matter;
the attention applies its own causal mask afterwards. Anchored variants
(rpe-square, rpe-absolute) derive their anchor weights from the layer's own
content logits through an unscaled max-subtracted causal softmax, matching
the reference kernel they are checked against, so the whole model keeps
attention logits unscaled.
"""

from __future__ import annotations

import torch
from torch import nn

BIAS_KINDS = ("rpe", "rpe-square", "rpe-absolute", "nope", "alibi")
# Slope of the locality prior the learned relative tables start from.
PRIOR_SLOPE = 3.0


def causal_softmax(logits: torch.Tensor) -> torch.Tensor:
    """Row-stochastic weights over keys <= query; upper triangle zeroed."""
    t = logits.shape[-1]
    mask = torch.ones(t, t, dtype=torch.bool, device=logits.device).tril()
    filled = logits.masked_fill(~mask, float("-inf"))
    return torch.softmax(filled, dim=-1)


def _offset_index(t: int, window: int, device) -> torch.Tensor:
    """Index into a signed-offset table for (query - key), shifted by window-1."""
    idx = torch.arange(t, device=device)
    return (idx[:, None] - idx[None, :]) + (window - 1)


def distance_profile(weights: torch.Tensor) -> torch.Tensor:
    """O[..., m, u] = weights[..., m, m-u] for u <= m, else 0."""
    t = weights.shape[-1]
    idx = torch.arange(t, device=weights.device)
    src = (idx[:, None] - idx[None, :]).clamp(min=0)
    gathered = weights.gather(-1, src.expand(weights.shape[:-2] + (t, t)))
    keep = idx[None, :] <= idx[:, None]
    return gathered * keep


class PositionBias(nn.Module):
    """One additive-bias table per layer, shared across heads."""

    def __init__(self, kind: str, heads: int, window: int):
        super().__init__()
        if kind not in BIAS_KINDS:
            raise ValueError(f"unknown bias kind {kind!r}")
        self.kind = kind
        self.window = window
        if kind in ("rpe", "rpe-square"):
            # Locality prior: start the table at -slope*|offset| so distant
            # offsets begin suppressed at every length; training reshapes
            # the near-zero entries it actually observes. Offsets the data
            # never exercises keep their suppression instead of keeping
            # whatever a flat init would leave there.
            offsets = torch.arange(2 * window - 1) - (window - 1)
            self.table = nn.Parameter(-PRIOR_SLOPE * offsets.abs().to(torch.float32))
        if kind == "rpe-absolute":
            # Anchored absolute distance has no locality structure worth
            # encoding; a flat start is the neutral choice.
            self.table = nn.Parameter(torch.zeros(2 * window - 1))
        if kind == "alibi":
            slopes = torch.tensor([2.0 ** (-8.0 * (h + 1) / heads) for h in range(heads)])
            self.register_buffer("slopes", slopes)

    def _toeplitz(self, t: int) -> torch.Tensor:
        return self.table[_offset_index(t, self.window, self.table.device)]

    def forward(self, content_logits: torch.Tensor) -> torch.Tensor:
        """Additive bias broadcastable against the [.., heads, T, T] logits."""
        t = content_logits.shape[-1]
        if t > self.window:
            raise ValueError(f"sequence length {t} exceeds bias window {self.window}")
        if self.kind == "nope":
            return torch.zeros_like(content_logits)
        if self.kind == "alibi":
            idx = torch.arange(t, device=content_logits.device, dtype=content_logits.dtype)
            dist = idx[:, None] - idx[None, :]
            return -self.slopes.to(content_logits.dtype)[:, None, None] * dist
        if self.kind == "rpe":
            return self._toeplitz(t).to(content_logits.dtype)
        anchors = causal_softmax(content_logits)
        profile = distance_profile(anchors)
        if self.kind == "rpe-square":
            rel = self._toeplitz(t).to(content_logits.dtype)
            return profile @ rel @ profile.transpose(-1, -2)
        # rpe-absolute: per-key scalar sum_u O[k, u] * R[u], constant in query
        positive = self.table[self.window - 1 :].to(content_logits.dtype)
        per_key = profile @ positive[:t]
        return per_key.unsqueeze(-2).expand_as(content_logits)


class Rotary(nn.Module):
    """Query/key rotation; adds no bias term."""

    def __init__(self, head_dim: int, base: float = 10000.0):
        super().__init__()
        if head_dim % 2 != 0:
            raise ValueError("rotary needs an even head dimension")
        inv = base ** (-torch.arange(0, head_dim, 2, dtype=torch.float32) / head_dim)
        self.register_buffer("inv_freq", inv)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        t = x.shape[-2]
        angles = torch.arange(t, device=x.device, dtype=torch.float32)[:, None] * self.inv_freq
        cos = torch.cos(angles).to(x.dtype).repeat(1, 2)
        sin = torch.sin(angles).to(x.dtype).repeat(1, 2)
        half = x.shape[-1] // 2
        rotated = torch.cat((-x[..., half:], x[..., :half]), dim=-1)
        return x * cos + rotated * sin


def bias_matrix(kind: str, table, content_logits) -> torch.Tensor:
    """Build a table-backed bias in one call; used by cross-implementation tests."""
    table = torch.as_tensor(table, dtype=torch.get_default_dtype())
    module = PositionBias(kind, heads=1, window=(table.numel() + 1) // 2)
    if not hasattr(module, "table"):
        raise ValueError(f"{kind!r} takes no table")
    with torch.no_grad():
        module.table.copy_(table)
    return module(content_logits)

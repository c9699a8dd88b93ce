"""Decoder-only transformer at desk scale.

Pre-norm blocks, learned token embeddings, no absolute position embedding:
all position information enters through the configured bias or rotation.
Attention logits stay unscaled so the anchored biases see exactly the
weights the reference kernel defines.
"""

from __future__ import annotations

import torch
from torch import nn

from .config import TrainConfig
from .pe import PositionBias, Rotary, causal_softmax


class Attention(nn.Module):
    def __init__(self, cfg: TrainConfig):
        super().__init__()
        self.heads = cfg.heads
        self.head_dim = cfg.width // cfg.heads
        self.qkv = nn.Linear(cfg.width, 3 * cfg.width)
        self.proj = nn.Linear(cfg.width, cfg.width)
        self.rotary = Rotary(self.head_dim) if cfg.pe == "rope" else None
        bias_kind = "nope" if cfg.pe == "rope" else cfg.pe
        self.pos_bias = PositionBias(bias_kind, cfg.heads, cfg.context)
        # Dropout on attention weights only: single retrieval edges must
        # survive losing a head, which rewards redundant position circuits.
        self.attn_drop = nn.Dropout(cfg.dropout)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        b, t, w = x.shape
        q, k, v = self.qkv(x).chunk(3, dim=-1)
        shape = (b, t, self.heads, self.head_dim)
        q = q.view(shape).transpose(1, 2)
        k = k.view(shape).transpose(1, 2)
        v = v.view(shape).transpose(1, 2)
        if self.rotary is not None:
            q, k = self.rotary(q), self.rotary(k)
        logits = q @ k.transpose(-1, -2)
        weights = self.attn_drop(causal_softmax(logits + self.pos_bias(logits)))
        out = (weights @ v).transpose(1, 2).reshape(b, t, w)
        return self.proj(out)


class Block(nn.Module):
    def __init__(self, cfg: TrainConfig):
        super().__init__()
        self.ln1 = nn.LayerNorm(cfg.width)
        self.attn = Attention(cfg)
        self.ln2 = nn.LayerNorm(cfg.width)
        self.mlp = nn.Sequential(
            nn.Linear(cfg.width, 4 * cfg.width),
            nn.GELU(),
            nn.Linear(4 * cfg.width, cfg.width),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        x = x + self.attn(self.ln1(x))
        return x + self.mlp(self.ln2(x))


class ToyDecoder(nn.Module):
    def __init__(self, cfg: TrainConfig, vocab_size: int):
        super().__init__()
        self.cfg = cfg
        self.embed = nn.Embedding(vocab_size, cfg.width)
        self.blocks = nn.ModuleList(Block(cfg) for _ in range(cfg.layers))
        self.ln_f = nn.LayerNorm(cfg.width)
        self.head = nn.Linear(cfg.width, vocab_size, bias=False)
        self.apply(self._init)
        # Output head reads through the embedding matrix (weight tying).
        self.head.weight = self.embed.weight

    @staticmethod
    def _init(module: nn.Module):
        if isinstance(module, (nn.Linear, nn.Embedding)):
            nn.init.normal_(module.weight, std=0.02)
            if getattr(module, "bias", None) is not None:
                nn.init.zeros_(module.bias)

    def forward(self, idx: torch.Tensor) -> torch.Tensor:
        if idx.shape[1] > self.cfg.context:
            raise ValueError(f"sequence length {idx.shape[1]} exceeds context {self.cfg.context}")
        x = self.embed(idx)
        for block in self.blocks:
            x = block(x)
        return self.head(self.ln_f(x))

    def param_count(self) -> int:
        return sum(p.numel() for p in self.parameters())

"""Training loop: AdamW, cosine schedule with warmup, loss on target tokens."""

from __future__ import annotations

import math

import torch
from torch import nn

from .config import TrainConfig, TrainResult
from .data import Vocab, check_fits, collate, load_records, sample_batch
from .model import ToyDecoder


def split_decay_params(model: nn.Module):
    """Weight decay on everything except norms and biases.

    Decaying the position tables matters: left exempt, they become a free
    place to park scale-indexed structure that does not survive longer
    sequences. Under decay, solutions that lean on a few strong entries win.
    """
    decay, no_decay = [], []
    for name, param in model.named_parameters():
        if not param.requires_grad:
            continue
        if param.ndim >= 2 or name.endswith("pos_bias.table"):
            decay.append(param)
        else:
            no_decay.append(param)
    return decay, no_decay


def make_optimizer(model: nn.Module, cfg: TrainConfig) -> torch.optim.AdamW:
    decay, no_decay = split_decay_params(model)
    return torch.optim.AdamW(
        [
            {"params": decay, "weight_decay": cfg.weight_decay},
            {"params": no_decay, "weight_decay": 0.0},
        ],
        lr=cfg.lr,
    )


def lr_scale(step: int, total: int, warmup_ratio: float) -> float:
    """Linear warmup then cosine decay to zero; step counts from 0."""
    warmup = max(1, round(warmup_ratio * total))
    if step < warmup:
        return (step + 1) / warmup
    span = max(1, total - warmup)
    return 0.5 * (1.0 + math.cos(math.pi * (step - warmup) / span))


def train_model(cfg: TrainConfig, records=None, vocab: Vocab | None = None):
    """Train on the configured dataset; returns (model, vocab, TrainResult).

    Dataset problems (schema, vocabulary, context overflow) raise before any
    optimizer step runs.
    """
    if records is None:
        records = load_records(cfg.train_path)
    if vocab is None:
        vocab = Vocab.default()
    check_fits(records, vocab, cfg.context)

    torch.manual_seed(cfg.seed)
    model = ToyDecoder(cfg, len(vocab))
    optimizer = make_optimizer(model, cfg)
    schedule = torch.optim.lr_scheduler.LambdaLR(
        optimizer, lambda step: lr_scale(step, cfg.schedule_horizon, cfg.warmup_ratio)
    )
    sampler = torch.Generator().manual_seed(cfg.seed)

    result = TrainResult(config=cfg)
    model.train()
    for _ in range(cfg.steps):
        optimizer.zero_grad(set_to_none=True)
        step_loss = 0.0
        # steps counts optimizer updates; each draws grad_accum micro-batches.
        for _ in range(cfg.grad_accum):
            batch = sample_batch(records, cfg.batch_size, sampler)
            x, y, mask = collate(batch, vocab)
            logits = model(x)
            loss = nn.functional.cross_entropy(logits[mask], y[mask]) / cfg.grad_accum
            loss.backward()
            step_loss += loss.item()
        optimizer.step()
        schedule.step()
        result.curve.append(step_loss)
    result.final_loss = result.curve[-1] if result.curve else float("nan")
    return model, vocab, result


def save_checkpoint(path, model: ToyDecoder, vocab: Vocab, result: TrainResult) -> None:
    torch.save(
        {
            "config": result.config.to_dict(),
            "vocab": list(vocab.tokens),
            "state_dict": model.state_dict(),
            "curve": result.curve,
        },
        str(path),
    )


def load_checkpoint(path):
    """Rebuild (model, vocab, config, curve) from a saved checkpoint."""
    payload = torch.load(str(path), map_location="cpu", weights_only=True)
    cfg = TrainConfig(**payload["config"])
    vocab = Vocab(tuple(payload["vocab"]))
    model = ToyDecoder(cfg, len(vocab))
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, vocab, cfg, payload["curve"]

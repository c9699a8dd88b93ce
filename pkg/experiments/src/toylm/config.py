"""Run configuration for the toy decoder."""

from __future__ import annotations

from dataclasses import dataclass, field

PE_KINDS = ("rpe", "rpe-square", "rpe-absolute", "nope", "alibi", "rope")


@dataclass(frozen=True)
class TrainConfig:
    pe: str
    train_path: str
    layers: int = 2
    heads: int = 4
    width: int = 128
    context: int = 64
    lr: float = 5e-4
    weight_decay: float = 1.0
    warmup_ratio: float = 0.05
    dropout: float = 0.1  # on attention weights only
    batch_size: int = 256
    grad_accum: int = 1
    steps: int = 1000
    # Horizon the warmup/cosine schedule is laid out over. Training may stop
    # earlier than the horizon ("early stop"); None means the two coincide.
    schedule_steps: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.pe not in PE_KINDS:
            raise ValueError(f"unknown pe kind {self.pe!r} (choose from {PE_KINDS})")
        if self.width % self.heads != 0:
            raise ValueError("width must divide evenly across heads")
        for name in ("layers", "heads", "width", "context", "batch_size", "grad_accum", "steps"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.warmup_ratio < 1.0:
            raise ValueError("warmup_ratio must be in [0, 1)")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")
        if self.schedule_steps is not None and self.schedule_steps < self.steps:
            raise ValueError("schedule_steps must be at least steps")

    @property
    def schedule_horizon(self) -> int:
        return self.steps if self.schedule_steps is None else self.schedule_steps

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class TrainResult:
    """Checkpoint payload plus the per-step loss curve."""

    config: TrainConfig
    curve: list = field(default_factory=list)
    final_loss: float = float("nan")

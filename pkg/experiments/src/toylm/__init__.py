"""Toy decoder-only transformer for length-generalization experiments."""

from .config import PE_KINDS, TrainConfig, TrainResult
from .data import (
    PAD,
    Record,
    SchemaError,
    Vocab,
    VocabularyError,
    check_fits,
    collate,
    load_records,
)
from .evaluate import (
    AccuracyReport,
    ScaleAccuracy,
    evaluate,
    mean_exact_match,
    replay_report,
    score_pairs,
    write_csv,
)
from .model import ToyDecoder
from .pe import PositionBias, Rotary, bias_matrix, causal_softmax, distance_profile
from .train import load_checkpoint, save_checkpoint, train_model

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

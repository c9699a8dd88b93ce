"""Dataset loading for emitted task records.

Reads the JSON Lines shards and manifests written by the dataset CLI; the
only contract with the producer is the record schema validated here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import torch

FORMAT_VERSION = 1
# Token order matches the producer's manifests; the pad symbol is ours.
DEFAULT_TOKENS = tuple("0123456789") + ("+", "*", "\\", "=", "b", "e")
PAD = "<pad>"


class SchemaError(ValueError):
    """Record or manifest does not match the expected shape."""


class VocabularyError(ValueError):
    """Tokens outside the model vocabulary."""


@dataclass(frozen=True)
class Vocab:
    tokens: tuple

    @classmethod
    def default(cls) -> "Vocab":
        return cls(DEFAULT_TOKENS + (PAD,))

    @classmethod
    def from_manifest(cls, path) -> "Vocab":
        with open(str(path), "r", encoding="utf-8") as src:
            manifest = json.load(src)
        if manifest.get("format_version") != FORMAT_VERSION:
            raise SchemaError(f"unsupported manifest version {manifest.get('format_version')!r}")
        return cls(tuple(manifest["vocab"]) + (PAD,))

    def __post_init__(self):
        if len(set(self.tokens)) != len(self.tokens):
            raise SchemaError("duplicate tokens in vocabulary")

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def pad_id(self) -> int:
        return len(self.tokens) - 1

    def encode(self, toks) -> list:
        table = {t: i for i, t in enumerate(self.tokens)}
        try:
            return [table[t] for t in toks]
        except KeyError as exc:
            raise VocabularyError(f"token {exc.args[0]!r} not in vocabulary") from None

    def decode(self, ids) -> list:
        return [self.tokens[int(i)] for i in ids]


@dataclass(frozen=True)
class Record:
    task: str
    scale: int
    input_tokens: tuple
    target_tokens: tuple


def _parse_record(obj: dict, lineno: int) -> Record:
    if not isinstance(obj, dict):
        raise SchemaError(f"line {lineno}: record must be an object")
    if obj.get("format_version") != FORMAT_VERSION:
        raise SchemaError(f"line {lineno}: unsupported format_version {obj.get('format_version')!r}")
    for key, kind in (("task", str), ("scale", int), ("input", str), ("target", str)):
        if not isinstance(obj.get(key), kind):
            raise SchemaError(f"line {lineno}: field {key!r} missing or wrong type")
    if obj["scale"] < 1:
        raise SchemaError(f"line {lineno}: scale must be positive")
    inp = tuple(obj["input"].split())
    tgt = tuple(obj["target"].split())
    if not inp or not tgt:
        raise SchemaError(f"line {lineno}: empty input or target")
    return Record(obj["task"], obj["scale"], inp, tgt)


def load_records(path) -> list:
    records = []
    with open(str(path), "r", encoding="utf-8") as src:
        for lineno, line in enumerate(src, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"line {lineno}: invalid JSON ({exc.msg})") from None
            records.append(_parse_record(obj, lineno))
    if not records:
        raise SchemaError(f"{path}: no records")
    return records


def check_fits(records, vocab: Vocab, context: int) -> None:
    """Abort before training on vocabulary or length violations."""
    for rec in records:
        ids = vocab.encode(rec.input_tokens + rec.target_tokens)
        if len(ids) > context:
            raise SchemaError(
                f"instance of scale {rec.scale} has {len(ids)} tokens, context is {context}"
            )


def encode_example(rec: Record, vocab: Vocab) -> tuple:
    """Token ids of input followed by target, plus the input length."""
    ids = vocab.encode(rec.input_tokens + rec.target_tokens)
    return ids, len(rec.input_tokens)


def collate(records, vocab: Vocab) -> tuple:
    """Next-token tensors (x, y, loss_mask), padded on the right.

    Loss positions are exactly the target tokens; inputs and padding are
    masked out. Right padding keeps every causal prefix of a real token
    free of pad ids.
    """
    encoded = [encode_example(r, vocab) for r in records]
    longest = max(len(ids) for ids, _ in encoded)
    pad = vocab.pad_id
    xs, ys, masks = [], [], []
    for ids, n_input in encoded:
        filled = ids + [pad] * (longest - len(ids))
        xs.append(filled[:-1])
        ys.append(filled[1:])
        masks.append([n_input <= t + 1 < len(ids) for t in range(longest - 1)])
    x = torch.tensor(xs, dtype=torch.long)
    y = torch.tensor(ys, dtype=torch.long)
    mask = torch.tensor(masks, dtype=torch.bool)
    return x, y, mask


def sample_batch(records, batch_size: int, generator: torch.Generator) -> list:
    idx = torch.randint(len(records), (batch_size,), generator=generator)
    return [records[int(i)] for i in idx]

"""Greedy evaluation: exact match and per-position accuracy by scale."""

from __future__ import annotations

from dataclasses import dataclass

import torch

from .data import Record, Vocab


@dataclass(frozen=True)
class ScaleAccuracy:
    pe: str
    task: str
    scale: int
    exact_match: float
    positionwise: tuple
    count: int

    def __post_init__(self):
        rates = (self.exact_match,) + tuple(self.positionwise)
        if any(not 0.0 <= r <= 1.0 for r in rates):
            raise ValueError("accuracy rates must lie in [0, 1]")


@dataclass
class AccuracyReport:
    rows: list

    def to_csv_lines(self) -> list:
        width = max((len(r.positionwise) for r in self.rows), default=0)
        header = "pe,task,scale,exact_match," + ",".join(
            f"pos{p + 1}" for p in range(width)
        )
        lines = [header.rstrip(",")]
        for r in sorted(self.rows, key=lambda r: (r.pe, r.task, r.scale)):
            cells = [r.pe, r.task, str(r.scale), f"{r.exact_match:.6f}"]
            cells += [f"{v:.6f}" for v in r.positionwise]
            cells += [""] * (width - len(r.positionwise))
            lines.append(",".join(cells).rstrip(","))
        return lines


def write_csv(report: AccuracyReport, path) -> None:
    with open(str(path), "w", encoding="utf-8") as sink:
        sink.write("\n".join(report.to_csv_lines()) + "\n")


@torch.no_grad()
def greedy_continuations(model, vocab: Vocab, prompts, max_new: int) -> list:
    """Argmax decoding of max_new tokens per prompt; prompts share a length."""
    model.eval()
    x = torch.tensor(prompts, dtype=torch.long)
    start = x.shape[1]
    for _ in range(max_new):
        logits = model(x)[:, -1, :]
        logits[:, vocab.pad_id] = float("-inf")
        x = torch.cat([x, logits.argmax(dim=-1, keepdim=True)], dim=1)
    return x[:, start:].tolist()


def _decode_records(model, vocab: Vocab, records) -> list:
    """Predicted target-token lists, one per record, batched by prompt length."""
    by_len: dict = {}
    for pos, rec in enumerate(records):
        by_len.setdefault(len(rec.input_tokens), []).append(pos)
    out = [None] * len(records)
    for length, positions in sorted(by_len.items()):
        prompts = [vocab.encode(records[p].input_tokens) for p in positions]
        max_new = max(len(records[p].target_tokens) for p in positions)
        decoded = greedy_continuations(model, vocab, prompts, max_new)
        for p, ids in zip(positions, decoded):
            out[p] = vocab.decode(ids[: len(records[p].target_tokens)])
    return out


def score_pairs(records, predictions, pe_label: str) -> AccuracyReport:
    """Exact-match and positionwise accuracy per (task, scale) group."""
    groups: dict = {}
    for rec, pred in zip(records, predictions):
        groups.setdefault((rec.task, rec.scale), []).append((rec.target_tokens, list(pred)))
    rows = []
    for (task, scale), pairs in sorted(groups.items()):
        exact = sum(list(ref) == pred for ref, pred in pairs) / len(pairs)
        width = max(len(ref) for ref, _ in pairs)
        hits = [0] * width
        totals = [0] * width
        for ref, pred in pairs:
            for p, tok in enumerate(ref):
                totals[p] += 1
                hits[p] += p < len(pred) and pred[p] == tok
        positionwise = tuple(h / t for h, t in zip(hits, totals))
        rows.append(ScaleAccuracy(pe_label, task, scale, exact, positionwise, len(pairs)))
    return AccuracyReport(rows)


def evaluate(model, vocab: Vocab, records, pe_label: str) -> AccuracyReport:
    """Greedy-decode every record, then score the predictions."""
    for rec in records:
        vocab.encode(rec.input_tokens + rec.target_tokens)
    return score_pairs(records, _decode_records(model, vocab, records), pe_label)


def replay_report(records, pe_label: str) -> AccuracyReport:
    """Score the ground truth against itself; every rate must come out 1.0."""
    return score_pairs(records, [list(r.target_tokens) for r in records], pe_label)


def mean_exact_match(report: AccuracyReport, scales) -> float:
    picked = [r for r in report.rows if r.scale in set(scales)]
    if not picked:
        raise ValueError("no rows at the requested scales")
    return sum(r.exact_match for r in picked) / len(picked)

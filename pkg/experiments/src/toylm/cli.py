"""Command line: `toylm train` and `toylm eval`."""

from __future__ import annotations

import argparse
import sys

from .config import PE_KINDS, TrainConfig
from .data import Vocab, load_records
from .evaluate import evaluate, write_csv
from .train import load_checkpoint, save_checkpoint, train_model


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="toylm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train a model on an emitted dataset")
    t.add_argument("--pe", required=True, choices=PE_KINDS)
    t.add_argument("--data", required=True, help="JSON lines training shard")
    t.add_argument("--manifest", default=None, help="manifest for the vocabulary")
    t.add_argument("--layers", type=int, default=2)
    t.add_argument("--heads", type=int, default=4)
    t.add_argument("--width", type=int, default=128)
    t.add_argument("--context", type=int, default=64)
    t.add_argument("--lr", type=float, default=5e-4)
    t.add_argument("--weight-decay", type=float, default=1.0)
    t.add_argument("--warmup-ratio", type=float, default=0.05)
    t.add_argument("--dropout", type=float, default=0.1,
                   help="dropout on attention weights")
    t.add_argument("--batch-size", type=int, default=256)
    t.add_argument("--grad-accum", type=int, default=1)
    t.add_argument("--steps", type=int, default=1000)
    t.add_argument("--schedule-steps", type=int, default=None,
                   help="schedule horizon when training stops early")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out", required=True, help="checkpoint path")

    e = sub.add_parser("eval", help="evaluate a checkpoint on a dataset")
    e.add_argument("--ckpt", required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--out", required=True, help="accuracy CSV path")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "train":
        cfg = TrainConfig(
            pe=args.pe,
            train_path=args.data,
            layers=args.layers,
            heads=args.heads,
            width=args.width,
            context=args.context,
            lr=args.lr,
            weight_decay=args.weight_decay,
            warmup_ratio=args.warmup_ratio,
            dropout=args.dropout,
            batch_size=args.batch_size,
            grad_accum=args.grad_accum,
            steps=args.steps,
            schedule_steps=args.schedule_steps,
            seed=args.seed,
        )
        vocab = Vocab.from_manifest(args.manifest) if args.manifest else None
        model, vocab, result = train_model(cfg, vocab=vocab)
        save_checkpoint(args.out, model, vocab, result)
        print(f"{args.out}: final loss {result.final_loss:.4f} after {cfg.steps} steps")
        return 0
    model, vocab, cfg, _ = load_checkpoint(args.ckpt)
    records = load_records(args.data)
    report = evaluate(model, vocab, records, pe_label=cfg.pe)
    write_csv(report, args.out)
    for row in report.rows:
        print(f"{row.task} scale {row.scale}: exact {row.exact_match:.3f} (n={row.count})")
    return 0


if __name__ == "__main__":
    sys.exit(main())

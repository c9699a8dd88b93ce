#!/usr/bin/env python3
"""Emit the standard task datasets as JSON-lines shards with manifests.

Writes one train file (scales 1..train_max) and one test file
(scales train_max+1..test_max) per task kind:

    python3 scripts/make_datasets.py --out data/ --train-max 5 --test-max 8
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ldhd.tasks import TASK_KINDS, emit_dataset


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=Path("data"))
    parser.add_argument("--kinds", nargs="+", default=list(TASK_KINDS), choices=TASK_KINDS)
    parser.add_argument("--train-max", type=int, default=5)
    parser.add_argument("--test-max", type=int, default=8)
    parser.add_argument("--train-count", type=int, default=2000, help="records per scale")
    parser.add_argument("--test-count", type=int, default=500, help="records per scale")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if not 1 <= args.train_max < args.test_max:
        parser.error("need 1 <= train-max < test-max")
    args.out.mkdir(parents=True, exist_ok=True)

    for kind in args.kinds:
        splits = (
            ("train", range(1, args.train_max + 1), args.train_count),
            ("test", range(args.train_max + 1, args.test_max + 1), args.test_count),
        )
        for split, scales, count in splits:
            path = args.out / f"{kind}.{split}.jsonl"
            manifest = emit_dataset(kind, list(scales), count, args.seed, path)
            total = len(manifest["scales"]) * count
            print(f"{path}: {total} records, scales {manifest['scales']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

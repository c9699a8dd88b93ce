"""Shared dataset fixture: one copy split per test session.

Generated through the producer CLI so every test consumes the same JSONL
boundary the package is built against.
"""

import subprocess
import sys

import pytest

from toylm.data import load_records


def gen_copy(path, scales, count, seed):
    subprocess.run(
        [
            sys.executable, "-m", "ldhd.cli", "gen",
            "--task", "copy", "--scales", scales,
            "--count", str(count), "--seed", str(seed),
            "--out", str(path),
        ],
        check=True,
        capture_output=True,
    )


@pytest.fixture(scope="session")
def copy_split(tmp_path_factory):
    root = tmp_path_factory.mktemp("copy")
    train = root / "train.jsonl"
    gen_copy(train, "1-5", 2000, 0)
    gen_copy(root / "ood.jsonl", "6-8", 500, 0)
    gen_copy(root / "id.jsonl", "1-5", 500, 1)
    return {
        "train": train,
        "ood": load_records(root / "ood.jsonl"),
        "id": load_records(root / "id.jsonl"),
    }

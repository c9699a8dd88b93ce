#!/usr/bin/env python3
"""Run every verification suite and write a merged JSON report.

Exit status is nonzero if any suite fails, so this doubles as a CI gate:

    python3 scripts/run_verify_all.py --out reports/ --seed 0
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ldhd.reports import merge_report_dicts
from ldhd.verify import SUITES


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", type=Path, default=None, help="directory for JSON reports")
    parser.add_argument(
        "--skip", action="append", default=[], metavar="SUITE", choices=sorted(SUITES)
    )
    args = parser.parse_args(argv)

    dicts = []
    for name, suite in SUITES.items():
        if name in args.skip:
            continue
        report = suite(seed=args.seed)
        for line in report.text_lines():
            print(line)
        dicts.append(report.to_dict())
        if args.out is not None:
            args.out.mkdir(parents=True, exist_ok=True)
            (args.out / f"{name}.json").write_text(report.to_json(), encoding="utf-8")

    merged = merge_report_dicts(dicts)
    if args.out is not None:
        import json

        (args.out / "all.json").write_text(
            json.dumps(merged, indent=2) + "\n", encoding="utf-8"
        )
    verdict = "PASS" if merged["passed"] else "FAIL"
    print(f"overall: {verdict} ({len(dicts)} suites)")
    return 0 if merged["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())

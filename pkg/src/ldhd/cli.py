"""Command-line front end: verification suites, dataset emission, bias dumps.

Exit codes: 0 when the requested work passes, 1 when a verification check
fails, 2 on usage errors (argparse's own convention). LDHD_SEED supplies the
seed when --seed is absent.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import pekernels, tasks, verify
from .reports import load_report, merge_report_dicts

PE_KINDS = ("rpe", "rpe-square", "rpe-absolute", "alibi", "nope")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _resolve_seed(flag_value, default: int = 0) -> int:
    if flag_value is not None:
        return flag_value
    env = os.environ.get("LDHD_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise SystemExit(f"ldhd: bad LDHD_SEED {env!r}: {exc}")
    return default


def _parse_scales(text: str) -> list:
    """Accept "4", "1,3,5", or "1-5"."""
    out = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if "-" in chunk[1:]:
            lo, hi = chunk.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif chunk:
            out.append(int(chunk))
    if not out:
        raise argparse.ArgumentTypeError(f"no scales in {text!r}")
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ldhd",
        description="Subcube interpolation, position-advice models, and task data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ver = sub.add_parser("verify", help="run a verification suite")
    vsub = ver.add_subparsers(dest="suite", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--json", dest="json_path", default=None)
        p.add_argument("--threads", type=_positive_int, default=1)

    p = vsub.add_parser("nfl", help="interpolator-sum equality by enumeration")
    p.add_argument("--n", type=_positive_int, default=3)
    p.add_argument("--n0", type=_positive_int, default=2)
    p.add_argument("--pairs", type=_positive_int, default=100)
    p.add_argument("--dists", type=_positive_int, default=5)
    common(p)

    p = vsub.add_parser("rfmp", help="random-feature deviation from the claimed fits")
    p.add_argument("--preset", choices=verify.RFMP_PRESETS, default="example-4-1")
    p.add_argument("--seeds", type=_positive_int, default=10)
    p.add_argument("--threshold", type=float, default=0.2)
    p.add_argument("--lr", type=float, default=0.05)
    common(p)

    p = vsub.add_parser("mindeg", help="profile solver against the closed form")
    p.add_argument("--count", type=_positive_int, default=50)
    p.add_argument("--n", type=_positive_int, default=4)
    p.add_argument("--n0", type=_positive_int, default=3)
    common(p)

    p = vsub.add_parser("plaa-ape", help="factored-score descent checks")
    p.add_argument("--n", type=_positive_int, default=4)
    p.add_argument("--n0", type=_positive_int, default=2)
    p.add_argument("--targets", type=_positive_int, default=20)
    p.add_argument("--lr", type=float, default=0.02)
    p.add_argument("--csv", dest="csv_path", default=None)
    common(p)

    p = vsub.add_parser("plaa-grpe", help="gain recovery and visibility predicate")
    p.add_argument("--n", type=_positive_int, default=5)
    p.add_argument("--n0", type=_positive_int, default=3)
    p.add_argument("--count", type=_positive_int, default=50)
    common(p)

    p = vsub.add_parser("pe", help="bias kernel cross-checks and gradients")
    common(p)

    p = vsub.add_parser("tasks", help="dataset oracle and determinism checks")
    p.add_argument("--count", type=_positive_int, default=10000)
    p.add_argument("--max-scale", type=_positive_int, default=4)
    common(p)

    g = sub.add_parser("gen", help="emit a task dataset as JSON lines")
    g.add_argument("--task", choices=tasks.TASK_KINDS, required=True)
    scale_group = g.add_mutually_exclusive_group(required=True)
    scale_group.add_argument("--max-scale", type=_positive_int, default=None)
    scale_group.add_argument("--scales", type=_parse_scales, default=None)
    g.add_argument("--count", type=int, required=True)
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--out", required=True)
    g.add_argument("--manifest", default=None)
    g.add_argument("--threads", type=_positive_int, default=1)

    pe = sub.add_parser("pe", help="position-bias utilities")
    pesub = pe.add_subparsers(dest="pe_command", required=True)
    b = pesub.add_parser("bias", help="dump a bias matrix as CSV")
    b.add_argument("--kind", choices=PE_KINDS, required=True)
    b.add_argument("--n", type=_positive_int, required=True)
    b.add_argument("--window", type=_positive_int, default=None)
    b.add_argument("--dim", type=_positive_int, default=8)
    b.add_argument("--slope", type=float, default=0.5)
    b.add_argument("--seed", type=int, default=None)
    b.add_argument("--out", default=None)
    b.add_argument("--dump-inputs", dest="dump_inputs", default=None)
    b.add_argument("--threads", type=_positive_int, default=1)

    r = sub.add_parser("report", help="report utilities")
    rsub = r.add_subparsers(dest="report_command", required=True)
    m = rsub.add_parser("merge", help="bundle suite reports into one JSON")
    m.add_argument("files", nargs="+")
    m.add_argument("--out", default=None)

    return parser


def _run_verify(args) -> int:
    seed = _resolve_seed(args.seed)
    if args.suite == "nfl":
        report = verify.suite_nfl(args.n, args.n0, args.pairs, args.dists, seed)
    elif args.suite == "rfmp":
        report = verify.suite_rfmp(
            preset=args.preset,
            seeds=args.seeds,
            threshold=args.threshold,
            lr=args.lr,
            seed=seed,
        )
    elif args.suite == "mindeg":
        report = verify.suite_mindeg(args.count, args.n, args.n0, seed)
    elif args.suite == "plaa-ape":
        report = verify.suite_plaa_ape(args.n, args.n0, args.targets, lr=args.lr, seed=seed)
    elif args.suite == "plaa-grpe":
        report = verify.suite_plaa_grpe(args.n, args.n0, args.count, seed)
    elif args.suite == "pe":
        report = verify.suite_pe(seed)
    else:
        report = verify.suite_tasks(args.count, args.max_scale, seed)
    for line in report.text_lines():
        print(line)
    if args.json_path:
        with open(args.json_path, "w", encoding="utf-8") as sink:
            sink.write(report.to_json())
    if args.suite == "plaa-ape" and args.csv_path:
        _write_ape_csv(args, seed)
    return 0 if report.passed else 1


def _write_ape_csv(args, seed: int) -> None:
    from . import plaa

    lines = ["target,alpha,loss,steps,converged,block_dev,off_block_sq,bound"]
    for t in range(args.targets):
        A = plaa.sample_feasible_target(args.n, args.n0, seed=[seed, 73, t])
        for row in plaa.ape_alpha_sweep(A, args.n0, (1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 1e-4), lr=args.lr):
            lines.append(
                f"{t},{row.alpha:.17g},{row.loss:.17g},{row.steps},"
                f"{int(row.converged)},{row.block_dev:.17g},"
                f"{row.off_block_sq:.17g},{row.bound:.17g}"
            )
    with open(args.csv_path, "w", encoding="utf-8") as sink:
        sink.write("\n".join(lines) + "\n")


def _run_gen(args) -> int:
    seed = _resolve_seed(args.seed)
    scales = args.scales if args.scales is not None else [args.max_scale]
    if args.count < 0:
        raise SystemExit("ldhd: --count must be nonnegative")
    manifest = tasks.emit_dataset(
        args.task, scales, args.count, seed, args.out, args.manifest
    )
    total = manifest["count"] * len(manifest["scales"])
    print(f"wrote {total} records to {args.out}")
    return 0


def _run_pe_bias(args) -> int:
    seed = _resolve_seed(args.seed)
    window = args.window if args.window is not None else args.n
    if window < args.n:
        raise SystemExit(f"ldhd: window {window} below sequence length {args.n}")
    rng = np.random.default_rng([seed, 17])
    table = pekernels.RelTable(rng.standard_normal(2 * window - 1))
    payload = {
        "format_version": 1,
        "kind": args.kind,
        "n": args.n,
        "window": window,
        "seed": seed,
        "table": list(table.values),
    }
    if args.kind in ("rpe-square", "rpe-absolute"):
        X = rng.standard_normal((args.n, args.dim))
        wq = rng.standard_normal((args.dim, args.dim)) / np.sqrt(args.dim)
        wk = rng.standard_normal((args.dim, args.dim)) / np.sqrt(args.dim)
        weights = pekernels.attention_weights(X, wq, wk)
        if args.kind == "rpe-square":
            bias = pekernels.rpe_square_bias(table, weights)
        else:
            bias = pekernels.rpe_absolute_bias(table, weights)
        payload.update(
            dim=args.dim,
            embeddings=X.tolist(),
            wq=wq.tolist(),
            wk=wk.tolist(),
        )
    elif args.kind == "rpe":
        bias = pekernels.rpe_bias(table, args.n)
    elif args.kind == "alibi":
        bias = pekernels.alibi_bias(args.slope, args.n)
        payload["slope"] = args.slope
    else:
        bias = np.zeros((args.n, args.n))
    text = "\n".join(pekernels.bias_csv_lines(bias)) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as sink:
            sink.write(text)
    else:
        sys.stdout.write(text)
    if args.dump_inputs:
        with open(args.dump_inputs, "w", encoding="utf-8") as sink:
            json.dump(payload, sink, indent=2)
            sink.write("\n")
    return 0


def _run_report_merge(args) -> int:
    merged = merge_report_dicts(load_report(p) for p in args.files)
    text = json.dumps(merged, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as sink:
            sink.write(text)
    else:
        sys.stdout.write(text)
    return 0 if merged["passed"] else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        return _run_verify(args)
    if args.command == "gen":
        return _run_gen(args)
    if args.command == "pe":
        return _run_pe_bias(args)
    return _run_report_merge(args)


if __name__ == "__main__":
    sys.exit(main())

"""Sequence task generators with latent digit tuples behind each string.

Every instance is sampled as a latent tuple of per-position digit groups,
then printed through a fixed format map. Addition-style tasks write digits
least-significant first so the output digit at position k depends only on
latent positions up to k; division keeps natural reading order. Tokens are
single characters separated by spaces, with b and e as the start and end
markers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidScaleError, TaskParseError

FORMAT_VERSION = 1
UNDETERMINED = "*"

VOCAB = tuple("0123456789") + ("+", "*", "\\", "=", "b", "e")

TASK_KINDS = (
    "urf-add",
    "arf-add",
    "copy",
    "parity-cot",
    "mul-1n",
    "div-n1",
    "add-mod10",
)


@dataclass(frozen=True)
class LatentVariable:
    """Per-position digit groups; trailing output slots may be undetermined."""

    kind: str
    entries: tuple

    @property
    def dimension(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class TaskInstance:
    kind: str
    scale: int
    latent: LatentVariable
    input_tokens: tuple
    target_tokens: tuple

    @property
    def input_text(self) -> str:
        return " ".join(self.input_tokens)

    @property
    def target_text(self) -> str:
        return " ".join(self.target_tokens)


@dataclass(frozen=True)
class DatasetRecord:
    task: str
    scale: int
    input: str
    target: str
    latent: str | None = None

    def to_json_line(self) -> str:
        body = {
            "format_version": FORMAT_VERSION,
            "task": self.task,
            "scale": self.scale,
            "input": self.input,
            "target": self.target,
        }
        if self.latent is not None:
            body["latent"] = self.latent
        return json.dumps(body, separators=(", ", ": "))

    @classmethod
    def from_json_line(cls, line: str) -> "DatasetRecord":
        try:
            body = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TaskParseError(f"bad record line: {exc}") from exc
        if body.get("format_version") != FORMAT_VERSION:
            raise TaskParseError(f"unsupported format_version {body.get('format_version')!r}")
        try:
            return cls(
                task=body["task"],
                scale=int(body["scale"]),
                input=body["input"],
                target=body["target"],
                latent=body.get("latent"),
            )
        except KeyError as exc:
            raise TaskParseError(f"record missing field {exc}") from exc


def _check_scale(scale: int) -> int:
    if int(scale) != scale or scale < 1:
        raise InvalidScaleError(f"scale must be a positive integer, got {scale!r}")
    return int(scale)


def _digits_lsb(value: int, width: int | None = None) -> list:
    """Digits of a nonnegative integer, least-significant first, zero-padded."""
    if value < 0:
        raise ValueError("negative value")
    out = [int(c) for c in reversed(str(value))]
    if width is not None:
        if len(out) > width:
            raise ValueError(f"{value} does not fit in {width} digits")
        out += [0] * (width - len(out))
    return out


def _int_of_lsb(digits) -> int:
    return sum(d * 10**k for k, d in enumerate(digits))


def _tokens(parts) -> tuple:
    return tuple(str(p) for p in parts)


def build_urf_addition(x: int, y: int) -> TaskInstance:
    """Unaligned reversed addition; the sum keeps exactly its true digits."""
    xd, yd = _digits_lsb(x), _digits_lsb(y)
    scale = max(len(xd), len(yd))
    zd = _digits_lsb(x + y)
    entries = tuple(
        (
            xd[k] if k < len(xd) else 0,
            yd[k] if k < len(yd) else 0,
            zd[k],
        )
        for k in range(scale)
    )
    return TaskInstance(
        kind="urf-add",
        scale=scale,
        latent=LatentVariable("urf-add", entries),
        input_tokens=_tokens(["b", *xd, "+", *yd, "="]),
        target_tokens=_tokens([*zd, "e"]),
    )


def build_arf_addition(x: int, y: int, width: int) -> TaskInstance:
    """Aligned reversed addition: addends padded to width, sum to width + 1."""
    width = _check_scale(width)
    xd, yd = _digits_lsb(x, width), _digits_lsb(y, width)
    zd = _digits_lsb(x + y, width + 1)
    entries = tuple((xd[k], yd[k], zd[k]) for k in range(width))
    return TaskInstance(
        kind="arf-add",
        scale=width,
        latent=LatentVariable("arf-add", entries),
        input_tokens=_tokens(["b", *xd, "+", *yd, "="]),
        target_tokens=_tokens([*zd, "e"]),
    )


def build_copy(digits) -> TaskInstance:
    digits = [int(d) for d in digits]
    entries = tuple((d, d) for d in digits)
    return TaskInstance(
        kind="copy",
        scale=len(digits),
        latent=LatentVariable("copy", entries),
        input_tokens=_tokens(["b", *digits, "="]),
        target_tokens=_tokens([*digits, "e"]),
    )


def build_parity_cot(bits) -> TaskInstance:
    """Running-parity chain: y_0 = x_0 and y_k = x_k xor y_{k-1}."""
    bits = [int(b) for b in bits]
    if any(b not in (0, 1) for b in bits):
        raise ValueError("parity inputs must be bits")
    ys = []
    acc = 0
    for b in bits:
        acc ^= b
        ys.append(acc)
    entries = tuple(zip(bits, ys))
    return TaskInstance(
        kind="parity-cot",
        scale=len(bits),
        latent=LatentVariable("parity-cot", entries),
        input_tokens=_tokens(["b", *bits, "="]),
        target_tokens=_tokens([*ys, "e"]),
    )


def build_mul_1n(x: int, y: int, width: int) -> TaskInstance:
    """One-digit times width-digit product, reversed, product on width + 1."""
    width = _check_scale(width)
    if not 1 <= x <= 9:
        raise ValueError("multiplier must be a single nonzero digit")
    yd = _digits_lsb(y, width)
    zd = _digits_lsb(x * y, width + 1)
    entries = tuple((yd[k], zd[k]) for k in range(width))
    return TaskInstance(
        kind="mul-1n",
        scale=width,
        latent=LatentVariable("mul-1n", entries),
        input_tokens=_tokens(["b", x, "*", *yd, "="]),
        target_tokens=_tokens([*zd, "e"]),
    )


def build_div_n1(x: int, y: int, width: int) -> TaskInstance:
    """Width-digit by one-digit integer division, natural reading order."""
    width = _check_scale(width)
    if not 1 <= x <= 9:
        raise ValueError("divisor must be a single nonzero digit")
    yd = _digits_lsb(y, width)
    zd = _digits_lsb(y // x, width)
    entries = tuple((yd[k], zd[k]) for k in range(width))
    return TaskInstance(
        kind="div-n1",
        scale=width,
        latent=LatentVariable("div-n1", entries),
        input_tokens=_tokens(["b", x, "\\", *reversed(yd), "="]),
        target_tokens=_tokens([*reversed(zd), "e"]),
    )


def build_add_mod10(x: int, y: int, width: int) -> TaskInstance:
    """Reversed equal-width addends, single output digit (x + y) mod 10."""
    width = _check_scale(width)
    xd, yd = _digits_lsb(x, width), _digits_lsb(y, width)
    z = (x + y) % 10
    entries = ((xd[0], yd[0], z),) + tuple((xd[k], yd[k]) for k in range(1, width))
    return TaskInstance(
        kind="add-mod10",
        scale=width,
        latent=LatentVariable("add-mod10", entries),
        input_tokens=_tokens(["b", *xd, "+", *yd, "="]),
        target_tokens=_tokens([z, "e"]),
    )


def _sample_value(rng: np.random.Generator, n_digits: int) -> int:
    return int(rng.integers(10 ** (n_digits - 1), 10**n_digits))


def sample_instance(kind: str, scale: int, rng: np.random.Generator) -> TaskInstance:
    """Draw one instance at the given scale parameter.

    For unaligned and aligned addition the scale parameter is the maximum
    addend length; both addend lengths are uniform on {1..scale} and values
    are uniform among numbers of that length, so leading digits are nonzero.
    """
    scale = _check_scale(scale)
    if kind == "urf-add" or kind == "arf-add":
        n1, n2 = int(rng.integers(1, scale + 1)), int(rng.integers(1, scale + 1))
        x, y = _sample_value(rng, n1), _sample_value(rng, n2)
        if kind == "urf-add":
            return build_urf_addition(x, y)
        return build_arf_addition(x, y, scale)
    if kind == "copy":
        return build_copy(rng.integers(0, 10, size=scale))
    if kind == "parity-cot":
        return build_parity_cot(rng.integers(0, 2, size=scale))
    if kind == "mul-1n":
        return build_mul_1n(int(rng.integers(1, 10)), _sample_value(rng, scale), scale)
    if kind == "div-n1":
        return build_div_n1(int(rng.integers(1, 10)), _sample_value(rng, scale), scale)
    if kind == "add-mod10":
        x, y = _sample_value(rng, scale), _sample_value(rng, scale)
        return build_add_mod10(x, y, scale)
    raise ValueError(f"unknown task kind {kind!r}")


def latent_of(instance: TaskInstance, cot_position: int) -> LatentVariable:
    """Latent with output slots past the chain position marked undetermined.

    Output slots are the third component for addition triples and the second
    for two-component chains; input-only pairs are left untouched.
    """
    if not 0 <= cot_position <= instance.scale:
        raise ValueError(f"cot_position {cot_position} outside [0, {instance.scale}]")
    masked = []
    for k, entry in enumerate(instance.latent.entries):
        if len(entry) >= 3 or instance.kind in ("copy", "parity-cot", "mul-1n", "div-n1"):
            if k >= cot_position:
                entry = entry[:-1] + (UNDETERMINED,)
        masked.append(entry)
    return LatentVariable(instance.latent.kind, tuple(masked))


def latent_text(latent: LatentVariable) -> str:
    return ";".join(",".join(str(c) for c in entry) for entry in latent.entries)


def latent_from_text(kind: str, text: str) -> LatentVariable:
    if text == "":
        return LatentVariable(kind, ())
    entries = []
    for part in text.split(";"):
        comps = part.split(",")
        if not comps:
            raise TaskParseError(f"empty latent entry in {text!r}")
        entry = tuple(c if c == UNDETERMINED else int(c) for c in comps)
        entries.append(entry)
    return LatentVariable(kind, tuple(entries))


def _split_marked(tokens, head: str, tail: str, what: str) -> list:
    tokens = list(tokens)
    if len(tokens) < 2 or tokens[0] != head or tokens[-1] != tail:
        raise TaskParseError(f"{what} must start with {head!r} and end with {tail!r}")
    for t in tokens:
        if t not in VOCAB:
            raise TaskParseError(f"token {t!r} outside the vocabulary")
    return tokens[1:-1]


def _parse_digits(tokens, what: str) -> list:
    out = []
    for t in tokens:
        if not t.isdigit():
            raise TaskParseError(f"expected a digit in {what}, got {t!r}")
        out.append(int(t))
    if not out:
        raise TaskParseError(f"empty digit run in {what}")
    return out


def _split_on(tokens, sep: str) -> tuple:
    if tokens.count(sep) != 1:
        raise TaskParseError(f"expected exactly one {sep!r}")
    at = tokens.index(sep)
    return tokens[:at], tokens[at + 1 :]


def parse_instance(kind: str, input_text: str, target_text: str) -> TaskInstance:
    """Invert the format map, reading the latent off the printed digits.

    The target digits are extracted, not recomputed, so a record with a
    structurally valid but arithmetically wrong target parses into a latent
    that disagrees with the one the generator would produce.
    """
    in_tokens = tuple(input_text.split())
    tgt_tokens = tuple(target_text.split())
    body = _split_marked(in_tokens, "b", "=", "input")
    if len(tgt_tokens) < 2 or tgt_tokens[-1] != "e":
        raise TaskParseError("target must end with 'e' after at least one token")
    for t in tgt_tokens:
        if t not in VOCAB:
            raise TaskParseError(f"token {t!r} outside the vocabulary")
    tgt_body = list(tgt_tokens[:-1])

    if kind in ("urf-add", "arf-add", "add-mod10"):
        xs, ys = _split_on(body, "+")
        xd, yd = _parse_digits(xs, "addend"), _parse_digits(ys, "addend")
        if kind == "urf-add":
            zd = _parse_digits(tgt_body, "sum")
            scale = max(len(xd), len(yd))
            if not scale <= len(zd) <= scale + 1:
                raise TaskParseError("sum length does not fit the addends")
            entries = tuple(
                (
                    xd[k] if k < len(xd) else 0,
                    yd[k] if k < len(yd) else 0,
                    zd[k],
                )
                for k in range(scale)
            )
        elif kind == "arf-add":
            if len(xd) != len(yd):
                raise TaskParseError("aligned addends must share a width")
            scale = len(xd)
            zd = _parse_digits(tgt_body, "sum")
            if len(zd) != scale + 1:
                raise TaskParseError("aligned sum must have width + 1 digits")
            entries = tuple((xd[k], yd[k], zd[k]) for k in range(scale))
        else:
            if len(xd) != len(yd):
                raise TaskParseError("modular addends must share a width")
            scale = len(xd)
            zd = _parse_digits(tgt_body, "modular sum")
            if len(zd) != 1:
                raise TaskParseError("modular sum must be a single digit")
            entries = ((xd[0], yd[0], zd[0]),) + tuple(
                (xd[k], yd[k]) for k in range(1, scale)
            )
    elif kind == "copy":
        xd = _parse_digits(body, "copy payload")
        zd = _parse_digits(tgt_body, "copy output")
        if len(zd) != len(xd):
            raise TaskParseError("copy output length differs from the payload")
        scale = len(xd)
        entries = tuple(zip(xd, zd))
    elif kind == "parity-cot":
        xd = _parse_digits(body, "parity payload")
        if any(b not in (0, 1) for b in xd):
            raise TaskParseError("parity payload must be bits")
        zd = _parse_digits(tgt_body, "parity output")
        if len(zd) != len(xd):
            raise TaskParseError("parity output length differs from the payload")
        scale = len(xd)
        entries = tuple(zip(xd, zd))
    elif kind == "mul-1n":
        xs, ys = _split_on(body, "*")
        xd = _parse_digits(xs, "multiplier")
        if len(xd) != 1:
            raise TaskParseError("multiplier must be one digit")
        yd = _parse_digits(ys, "multiplicand")
        zd = _parse_digits(tgt_body, "product")
        if len(zd) != len(yd) + 1:
            raise TaskParseError("product must have width + 1 digits")
        scale = len(yd)
        entries = tuple((yd[k], zd[k]) for k in range(scale))
    elif kind == "div-n1":
        xs, ys = _split_on(body, "\\")
        xd = _parse_digits(xs, "divisor")
        if len(xd) != 1:
            raise TaskParseError("divisor must be one digit")
        yd = list(reversed(_parse_digits(ys, "dividend")))
        zd = list(reversed(_parse_digits(tgt_body, "quotient")))
        if len(zd) != len(yd):
            raise TaskParseError("quotient length differs from the dividend")
        scale = len(yd)
        entries = tuple((yd[k], zd[k]) for k in range(scale))
    else:
        raise TaskParseError(f"unknown task kind {kind!r}")

    return TaskInstance(
        kind=kind,
        scale=scale,
        latent=LatentVariable(kind, entries),
        input_tokens=in_tokens,
        target_tokens=tgt_tokens,
    )


def format_round_trip(instance: TaskInstance) -> bool:
    """True when printing then parsing reproduces the instance exactly."""
    parsed = parse_instance(instance.kind, instance.input_text, instance.target_text)
    return parsed == instance


def record_of(instance: TaskInstance) -> DatasetRecord:
    return DatasetRecord(
        task=instance.kind,
        scale=instance.scale,
        input=instance.input_text,
        target=instance.target_text,
        latent=latent_text(instance.latent),
    )


def oracle_check(record: DatasetRecord) -> bool:
    """Re-derive the target from the parsed input with exact integers."""
    try:
        inst = parse_instance(record.task, record.input, record.target)
        body = _split_marked(record.input.split(), "b", "=", "input")
        tgt_body = record.target.split()[:-1]
        if record.task in ("urf-add", "arf-add", "add-mod10"):
            xs, ys = _split_on(body, "+")
            x = _int_of_lsb(_parse_digits(xs, "addend"))
            y = _int_of_lsb(_parse_digits(ys, "addend"))
            zd = _parse_digits(tgt_body, "output")
            if record.task == "urf-add":
                good = zd == _digits_lsb(x + y)
            elif record.task == "arf-add":
                good = zd == _digits_lsb(x + y, len(xs) + 1)
            else:
                good = zd == [(x + y) % 10]
        elif record.task == "copy":
            good = tgt_body == body
        elif record.task == "parity-cot":
            xd = _parse_digits(body, "payload")
            acc, ys = 0, []
            for b in xd:
                acc ^= b
                ys.append(acc)
            good = _parse_digits(tgt_body, "output") == ys
        elif record.task == "mul-1n":
            xs, ys = _split_on(body, "*")
            x, yd = _parse_digits(xs, "x")[0], _parse_digits(ys, "y")
            good = _parse_digits(tgt_body, "output") == _digits_lsb(
                x * _int_of_lsb(yd), len(yd) + 1
            )
        elif record.task == "div-n1":
            xs, ys = _split_on(body, "\\")
            x = _parse_digits(xs, "x")[0]
            y = _int_of_lsb(list(reversed(_parse_digits(ys, "y"))))
            zd = list(reversed(_parse_digits(tgt_body, "output")))
            good = zd == _digits_lsb(y // x, len(ys))
        else:
            return False
    except TaskParseError:
        return False
    return bool(good) and inst.scale == record.scale and format_round_trip(inst)


def emit_dataset(kind: str, scales, count: int, seed: int, out_path, manifest_path=None) -> dict:
    """Write count records per scale as JSON lines plus a manifest.

    Each scale is an independent shard seeded by (seed, scale), so shards
    can be produced in parallel and merge order-stably.
    """
    if kind not in TASK_KINDS:
        raise ValueError(f"unknown task kind {kind!r}")
    scales = [_check_scale(s) for s in scales]
    if count < 0:
        raise ValueError("count must be nonnegative")
    out_path = str(out_path)
    if manifest_path is None:
        manifest_path = out_path + ".manifest.json"
    with open(out_path, "w", encoding="utf-8") as sink:
        for scale in scales:
            rng = np.random.default_rng([seed, scale])
            for _ in range(count):
                inst = sample_instance(kind, scale, rng)
                sink.write(record_of(inst).to_json_line() + "\n")
    manifest = {
        "format_version": FORMAT_VERSION,
        "task": kind,
        "scales": scales,
        "count": count,
        "seed": seed,
        "vocab": list(VOCAB),
    }
    with open(str(manifest_path), "w", encoding="utf-8") as sink:
        json.dump(manifest, sink, indent=2)
        sink.write("\n")
    return manifest


def read_records(path) -> list:
    with open(str(path), "r", encoding="utf-8") as src:
        return [DatasetRecord.from_json_line(line) for line in src if line.strip()]


@dataclass(frozen=True)
class ScaleScore:
    count: int
    exact_match: float
    positionwise: tuple = field(default_factory=tuple)


def score_predictions(records, predictions) -> dict:
    """Per-scale exact match plus per-output-position token accuracy.

    Exact match compares the whole target including the end marker;
    positionwise accuracy covers target positions before the end marker.
    """
    records = list(records)
    predictions = list(predictions)
    if len(records) != len(predictions):
        raise ValueError(f"{len(records)} records vs {len(predictions)} predictions")
    by_scale = {}
    for rec, pred in zip(records, predictions):
        by_scale.setdefault(rec.scale, []).append((rec, pred))
    out = {}
    for scale in sorted(by_scale):
        pairs = by_scale[scale]
        exact = sum(rec.target == pred for rec, pred in pairs) / len(pairs)
        width = max(len(rec.target.split()) - 1 for rec, _ in pairs)
        hits = np.zeros(width)
        seen = np.zeros(width)
        for rec, pred in pairs:
            tgt = rec.target.split()[:-1]
            got = pred.split()
            for k, tok in enumerate(tgt):
                seen[k] += 1
                if k < len(got) and got[k] == tok:
                    hits[k] += 1
        ratio = tuple(float(h / s) if s else 0.0 for h, s in zip(hits, seen))
        out[scale] = ScaleScore(count=len(pairs), exact_match=float(exact), positionwise=ratio)
    return out

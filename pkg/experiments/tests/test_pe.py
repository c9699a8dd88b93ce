"""Positional bias modules, checked against hand values and the producer CLI.

The boundary contract test drives the dataset producer's `pe bias` command
as a subprocess and replays its dumped inputs through the in-model modules;
the CSV it writes is the only shared artifact.
"""

import csv
import json
import subprocess
import sys

import pytest
import torch

from toylm import PositionBias, Rotary, bias_matrix, causal_softmax, distance_profile


def run_pe_bias(tmp_path, kind, n, window, dim=8, seed=3):
    out = tmp_path / "bias.csv"
    dump = tmp_path / "inputs.json"
    cmd = [
        sys.executable, "-m", "ldhd.cli", "pe", "bias",
        "--kind", kind, "--n", str(n), "--window", str(window),
        "--dim", str(dim), "--seed", str(seed),
        "--out", str(out), "--dump-inputs", str(dump),
    ]
    subprocess.run(cmd, check=True, capture_output=True)
    payload = json.loads(dump.read_text(encoding="utf-8"))
    with open(out, encoding="utf-8") as src:
        rows = list(csv.DictReader(src))
    ref = {(int(r["row"]), int(r["col"])): float(r["value"]) for r in rows}
    return payload, ref


def causal_pairs(n):
    return [(i, j) for i in range(n) for j in range(i, n)]


def test_boundary_contract_rpe_square(tmp_path):
    # criterion: in-model bias equals the producer's CSV dump at 1e-5
    payload, ref = run_pe_bias(tmp_path, "rpe-square", n=12, window=16)
    X = torch.tensor(payload["embeddings"], dtype=torch.float32)
    wq = torch.tensor(payload["wq"], dtype=torch.float32)
    wk = torch.tensor(payload["wk"], dtype=torch.float32)
    logits = (X @ wq.T) @ (X @ wk.T).T
    with torch.no_grad():
        bias = bias_matrix("rpe-square", payload["table"], logits[None, None])[0, 0]
    # CSV rows are [key, query]; the module emits [query, key]
    worst = max(abs(float(bias[j, i]) - ref[(i, j)]) for i, j in causal_pairs(12))
    assert worst <= 1e-5


def test_boundary_contract_rpe_and_absolute(tmp_path):
    for kind in ("rpe", "rpe-absolute"):
        payload, ref = run_pe_bias(tmp_path, kind, n=10, window=12)
        if kind == "rpe":
            logits = torch.zeros(10, 10)
        else:
            X = torch.tensor(payload["embeddings"], dtype=torch.float32)
            wq = torch.tensor(payload["wq"], dtype=torch.float32)
            wk = torch.tensor(payload["wk"], dtype=torch.float32)
            logits = (X @ wq.T) @ (X @ wk.T).T
        with torch.no_grad():
            bias = bias_matrix(kind, payload["table"], logits[None, None])
        bias = bias.reshape(bias.shape[-2:])
        worst = max(abs(float(bias[j, i]) - ref[(i, j)]) for i, j in causal_pairs(10))
        assert worst <= 1e-5, kind


def test_causal_softmax_rows():
    logits = torch.randn(2, 3, 5, 5)
    w = causal_softmax(logits)
    assert torch.all(w.sum(dim=-1).isclose(torch.ones(()))).item()
    assert torch.all(torch.triu(w, diagonal=1) == 0).item()
    # first row attends only to itself
    assert torch.all(w[..., 0, 0] == 1.0).item()


def test_distance_profile_values():
    w = causal_softmax(torch.randn(4, 4))
    prof = distance_profile(w)
    for m in range(4):
        for u in range(4):
            expected = float(w[m, m - u]) if u <= m else 0.0
            assert float(prof[m, u]) == pytest.approx(expected)


def test_rpe_bias_is_toeplitz():
    table = [float(v) for v in range(-3, 4)]  # window 4, R[0] at index 3
    with torch.no_grad():
        bias = bias_matrix("rpe", table, torch.zeros(1, 1, 4, 4))
    for q in range(4):
        for k in range(q + 1):
            assert float(bias[q, k]) == pytest.approx(table[q - k + 3])


def test_alibi_slopes_and_distances():
    mod = PositionBias("alibi", heads=4, window=8)
    bias = mod(torch.zeros(4, 5, 5))
    for h, slope in enumerate((2.0**-2, 2.0**-4, 2.0**-6, 2.0**-8)):
        assert float(bias[h, 3, 1]) == pytest.approx(-slope * 2)
        assert float(bias[h, 2, 2]) == 0.0


def test_nope_is_zero_and_rope_preserves_norm():
    mod = PositionBias("nope", heads=2, window=8)
    logits = torch.randn(2, 2, 6, 6)
    assert torch.all(mod(logits) == 0).item()
    rot = Rotary(8)
    x = torch.randn(2, 5, 8)
    assert torch.allclose(rot(x).norm(dim=-1), x.norm(dim=-1), atol=1e-5)


def test_rope_relative_dependence():
    # scores of rotated q.k depend only on the position difference
    rot = Rotary(8)
    q = torch.randn(8)
    k = torch.randn(8)
    stacked_q = rot(q.repeat(6, 1))
    stacked_k = rot(k.repeat(6, 1))
    s1 = float(stacked_q[3] @ stacked_k[1])
    s2 = float(stacked_q[5] @ stacked_k[3])
    assert s1 == pytest.approx(s2, abs=1e-5)


def test_window_enforced():
    mod = PositionBias("rpe", heads=1, window=4)
    with pytest.raises(ValueError):
        mod(torch.zeros(1, 1, 5, 5))


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        PositionBias("abacus", heads=1, window=4)


def test_relative_tables_start_with_locality_prior():
    # Init is -3|offset|: zero at offset 0, more negative further out.
    for kind in ("rpe", "rpe-square"):
        mod = PositionBias(kind, heads=2, window=6)
        table = mod.table.detach()
        assert table[5] == 0.0, kind
        assert table[4] == table[6] == -3.0, kind
        assert table[0] == table[10] == -15.0, kind


def test_absolute_table_starts_flat():
    mod = PositionBias("rpe-absolute", heads=2, window=6)
    assert torch.all(mod.table.detach() == 0.0).item()


def test_rpe_prior_bias_prefers_near_keys():
    mod = PositionBias("rpe", heads=1, window=8)
    logits = torch.zeros(1, 1, 6, 6)
    with torch.no_grad():
        bias = mod(logits)
    assert bias[5, 5] == 0.0
    assert bias[5, 0] == -15.0
    assert torch.all(bias[5, :-1] < bias[5, 1:]).item()


def test_rpe_square_gradient_reaches_table():
    mod = PositionBias("rpe-square", heads=1, window=6)
    logits = torch.randn(1, 1, 5, 5, requires_grad=True)
    out = mod(logits).sum()
    out.backward()
    assert mod.table.grad is not None
    assert float(mod.table.grad.abs().sum()) > 0
    assert logits.grad is not None

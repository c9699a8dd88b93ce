"""End-to-end CLI behavior: exit codes, artifacts, seeds, and merging."""

import json

import numpy as np
import pytest

from ldhd import cli, tasks
from ldhd.pekernels import RelTable, rpe_bias


def run(argv):
    return cli.main(argv)


def test_usage_error_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["verify"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        run(["gen", "--task", "copy", "--count", "5", "--out", "x"])
    assert exc.value.code == 2  # neither --max-scale nor --scales
    with pytest.raises(SystemExit) as exc:
        run(["verify", "nfl", "--threads", "0"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_verify_nfl_passes_and_writes_stable_json(tmp_path, capsys):
    out1 = tmp_path / "one.json"
    out2 = tmp_path / "two.json"
    args = ["verify", "nfl", "--pairs", "5", "--dists", "2", "--seed", "3"]
    assert run(args + ["--json", str(out1)]) == 0
    assert run(args + ["--json", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    data = json.loads(out1.read_text())
    assert data["suite"] == "nfl" and data["seed"] == 3 and data["passed"]
    assert "wall_time" not in out1.read_text()
    stdout = capsys.readouterr().out
    assert "[PASS] max-sum-gap" in stdout


def test_verify_exit_code_tracks_failure(tmp_path, capsys):
    # an absurd threshold forces the rfmp suite to report failure
    code = run(
        ["verify", "rfmp", "--seeds", "1", "--threshold", "-1.0", "--seed", "0"]
    )
    assert code == 1
    capsys.readouterr()


def test_verify_seed_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("LDHD_SEED", "11")
    out = tmp_path / "env.json"
    assert run(["verify", "mindeg", "--count", "3", "--json", str(out)]) == 0
    assert json.loads(out.read_text())["seed"] == 11
    monkeypatch.setenv("LDHD_SEED", "eleven")
    with pytest.raises(SystemExit):
        run(["verify", "mindeg", "--count", "3"])
    capsys.readouterr()


def test_flag_seed_beats_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("LDHD_SEED", "11")
    out = tmp_path / "flag.json"
    assert run(["verify", "mindeg", "--count", "3", "--seed", "5", "--json", str(out)]) == 0
    assert json.loads(out.read_text())["seed"] == 5
    capsys.readouterr()


def test_gen_writes_dataset_and_manifest(tmp_path, capsys):
    out = tmp_path / "copy.jsonl"
    man = tmp_path / "copy.manifest.json"
    code = run(
        [
            "gen", "--task", "copy", "--scales", "1-3", "--count", "20",
            "--seed", "2", "--out", str(out), "--manifest", str(man),
        ]
    )
    assert code == 0
    records = tasks.read_records(out)
    assert len(records) == 60
    assert sorted({r.scale for r in records}) == [1, 2, 3]
    assert all(tasks.oracle_check(r) for r in records)
    manifest = json.loads(man.read_text())
    assert manifest["scales"] == [1, 2, 3] and manifest["seed"] == 2
    assert "wrote 60 records" in capsys.readouterr().out


def test_gen_scale_list_and_max_scale(tmp_path, capsys):
    out = tmp_path / "a.jsonl"
    run(["gen", "--task", "copy", "--scales", "2,4", "--count", "3",
         "--seed", "0", "--out", str(out)])
    assert sorted({r.scale for r in tasks.read_records(out)}) == [2, 4]
    run(["gen", "--task", "copy", "--max-scale", "2", "--count", "3",
         "--seed", "0", "--out", str(out)])
    assert {r.scale for r in tasks.read_records(out)} == {2}
    capsys.readouterr()


def test_pe_bias_csv_matches_kernel(tmp_path, capsys):
    out = tmp_path / "bias.csv"
    dump = tmp_path / "inputs.json"
    code = run(
        ["pe", "bias", "--kind", "rpe", "--n", "4", "--window", "6",
         "--seed", "1", "--out", str(out), "--dump-inputs", str(dump)]
    )
    assert code == 0
    payload = json.loads(dump.read_text())
    assert payload["kind"] == "rpe" and payload["window"] == 6
    table = RelTable(np.array(payload["table"]))
    expected = rpe_bias(table, 4)
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "row,col,value"
    assert len(lines) == 1 + 10
    for line in lines[1:]:
        i, j, v = line.split(",")
        assert expected[int(i), int(j)] == float(v)
    capsys.readouterr()


def test_pe_bias_window_must_cover_sequence(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["pe", "bias", "--kind", "rpe", "--n", "8", "--window", "3"])
    assert "window" in str(exc.value)
    capsys.readouterr()


def test_pe_bias_square_dump_reproducible(tmp_path, capsys):
    args = ["pe", "bias", "--kind", "rpe-square", "--n", "5", "--dim", "4",
            "--seed", "3"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(args + ["--out", str(a)])
    run(args + ["--out", str(b)])
    assert a.read_bytes() == b.read_bytes()
    dump = tmp_path / "in.json"
    run(args + ["--out", str(a), "--dump-inputs", str(dump)])
    payload = json.loads(dump.read_text())
    assert payload["dim"] == 4
    assert len(payload["embeddings"]) == 5
    capsys.readouterr()


def test_pe_bias_nope_is_zero(tmp_path, capsys):
    out = tmp_path / "z.csv"
    run(["pe", "bias", "--kind", "nope", "--n", "3", "--out", str(out)])
    values = [float(l.split(",")[2]) for l in out.read_text().splitlines()[1:]]
    assert values == [0.0] * 6
    capsys.readouterr()


def test_report_merge_exit_codes(tmp_path, capsys):
    ok = tmp_path / "ok.json"
    merged = tmp_path / "merged.json"
    assert run(["verify", "nfl", "--pairs", "2", "--dists", "1",
                "--json", str(ok)]) == 0
    assert run(["report", "merge", str(ok), str(ok), "--out", str(merged)]) == 0
    bundle = json.loads(merged.read_text())
    assert bundle["passed"] and len(bundle["suites"]) == 2
    # doctor one copy into a failure
    bad = json.loads(ok.read_text())
    bad["passed"] = False
    badpath = tmp_path / "bad.json"
    badpath.write_text(json.dumps(bad))
    assert run(["report", "merge", str(ok), str(badpath)]) == 1
    capsys.readouterr()


def test_parse_scales():
    assert cli._parse_scales("4") == [4]
    assert cli._parse_scales("1,3,5") == [1, 3, 5]
    assert cli._parse_scales("1-4") == [1, 2, 3, 4]
    assert cli._parse_scales("2,5-6") == [2, 5, 6]

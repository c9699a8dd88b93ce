import json

import pytest

from ldhd.reports import Check, VerificationReport, load_report, merge_report_dicts


def make_report(passed=True):
    return VerificationReport(
        suite="demo",
        seed=4,
        checks=[
            Check("alpha", 0.5, 1.0, True),
            Check("beta", 2.0, 1.0, passed),
            Check("info-only", 3, None, True),
        ],
        wall_time=1.234,
    )


def test_passed_aggregates_checks():
    assert make_report(True).passed
    assert not make_report(False).passed


def test_json_omits_wall_time():
    rep = make_report()
    data = json.loads(rep.to_json())
    assert "wall_time" not in json.dumps(data)
    assert data["format_version"] == 1
    assert data["suite"] == "demo"
    assert data["checks"][2]["threshold"] is None
    # identical content regardless of how long the run took
    slower = make_report()
    slower.wall_time = 99.0
    assert slower.to_json() == rep.to_json()


def test_text_lines_shape():
    lines = make_report(False).text_lines()
    assert lines[0] == "suite demo (seed 4)"
    assert "[PASS] alpha: value=0.5 threshold=1" in lines[1]
    assert "[FAIL] beta" in lines[2]
    assert "threshold" not in lines[3]
    assert lines[-1].startswith("  FAIL (3 checks, 1.23")


def test_merge_report_dicts():
    good = make_report(True).to_dict()
    bad = make_report(False).to_dict()
    merged = merge_report_dicts([good, bad])
    assert merged["passed"] is False
    assert len(merged["suites"]) == 2
    assert merge_report_dicts([good])["passed"] is True
    with pytest.raises(ValueError):
        merge_report_dicts([{"format_version": 9, "passed": True}])


def test_load_report(tmp_path):
    path = tmp_path / "rep.json"
    path.write_text(make_report().to_json())
    assert load_report(path)["suite"] == "demo"

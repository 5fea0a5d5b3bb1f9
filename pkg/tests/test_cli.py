import json
from fractions import Fraction

import pytest

from pcfrac import cli
from pcfrac.cli import parse_interval, parse_rational, rational_json, run, to_jsonable
from pcfrac.numerics import Interval, sqrt


def _json(capsys, argv, code=0):
    assert run(argv) == code
    return json.loads(capsys.readouterr().out)


def test_table1_matches(capsys):
    rec = _json(capsys, ["table1"])
    assert rec["results"]["matches"] is True
    assert rec["schema_version"] == "1" and rec["command"] == "table1"
    assert set(rec["precision_report"]) >= {"max_bits_used", "escalations"}


def test_table1_is_deterministic(capsys):
    assert run(["table1", "--format", "csv"]) == 0
    first = capsys.readouterr().out
    assert run(["table1", "--format", "csv"]) == 0
    assert capsys.readouterr().out == first
    assert len(first.strip().splitlines()) == 9


def test_table1_mismatch_exits_two(capsys, monkeypatch):
    broken = dict(cli.TABLE1_EXPECTED, **{"0.5": "2 3/2"})
    monkeypatch.setattr(cli, "TABLE1_EXPECTED", broken)
    rec = _json(capsys, ["table1"], code=2)
    assert rec["results"]["differing_rows"] == ["0.5"]


def test_check_phi(capsys):
    rec = _json(capsys, ["check", "--alpha", "phi", "--p", "1/2", "--terms", "8"])
    assert rec["results"]["match"] is True


def test_rational_alpha_is_input_error(capsys):
    assert run(["expand", "--alpha", "surd:(1+0*sqrt(2))/1", "--p", "1/2", "--terms", "3"]) == 1
    assert "rational" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["expand", "--alpha", "phi", "--p", "1.5"],
    ["expand", "--alpha", "phi", "--p", "abc"],
    ["expand", "--alpha", "pi", "--p", "1/2"],
    ["pm", "--a", "1", "--m", "2"],
    ["ball-data", "--alpha", "phi", "--p", "1/2", "--step", "-1"],
    ["gm-curve", "--grid", "0.5:0.1:0.1"],
    ["nonsense"],
])
def test_bad_inputs_exit_one(argv, capsys):
    assert run(argv) == 1


def test_invariant_violation_exits_two(capsys, monkeypatch):
    monkeypatch.setattr(cli, "check_invariants", lambda exp, consts, policy: ["forced failure"])
    rec = _json(capsys, ["expand", "--alpha", "phi", "--p", "1/2", "--terms", "3"], code=2)
    assert rec["results"]["problems"] == ["forced failure"]


def test_undecidable_exits_two(capsys, monkeypatch):
    monkeypatch.setenv("PCF_MAX_BITS", "64")
    assert run(["constants", "--p", "1/3"]) == 2
    assert "UndecidableComparison" in capsys.readouterr().err


def test_expand_json_round_trip(capsys):
    rec = _json(capsys, ["expand", "--alpha", "neg:e+3", "--p", "1/2", "--terms", "5"])
    res = rec["results"]
    conv = [parse_rational(c) for c in res["convergents"]]
    assert conv[:2] == [Fraction(0), Fraction(2, 7)]
    for t in res["t"]:
        lo, hi = parse_interval(t)
        assert lo < hi
    assert res["problems"] == [] and res["skip_profile"]
    assert len(res["terms"]) == 4


def test_expand_csv(capsys):
    assert run(["expand", "--alpha", "phi", "--p", "0.3", "--terms", "6", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "m,r,s,eps,a,det,t_lo,t_hi,regular_index"
    assert len(lines) == 7
    assert lines[1].split(",")[1:3] == ["8", "5"]


def test_constants_enclose_reference(capsys):
    rec = _json(capsys, ["constants", "--p", "1/2"])
    lo, hi = parse_interval(rec["results"]["gm_bound"])
    # the reference is truncated to 25 digits
    ref = Fraction("0.4795185586285225816171445")
    assert lo - Fraction(1, 10**25) <= ref <= hi
    assert rec["results"]["ell_max"] == 8


def test_gm_curve_csv_and_workers(capsys, tmp_path):
    out = tmp_path / "gm.csv"
    assert run(["gm-curve", "--grid", "0.1:0.9:0.1", "--workers", "3", "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "p,gm_bound_lo,gm_bound_hi" and len(lines) == 10
    assert capsys.readouterr().out == ""
    assert run(["gm-curve", "--grid", "0.1:0.9:0.1"]) == 0
    assert capsys.readouterr().out.strip().splitlines() == lines


def test_oracle_command(capsys):
    rec = _json(capsys, ["oracle", "--alpha", "phi-2", "--p", "1/2", "--smax", "300"])
    got = [parse_rational(x) + 2 for x in rec["results"]["best_approximations"]]
    assert got[:3] == [Fraction(2), Fraction(5, 3), Fraction(8, 5)]


def test_pm_command(capsys):
    rec = _json(capsys, ["pm", "--a", "1", "--m", "6", "--scan-to", "8"])
    res = rec["results"]
    lo, hi = parse_interval(res["p_m"])
    assert Fraction(1, 5) < lo < hi < Fraction(1, 4)
    assert res["first_convergents"]["first_below"] == "21/13"
    assert res["threshold_scan"]["threshold"] == 4


def test_curve_and_ball_data(capsys):
    assert run(["curve-data", "--a", "1", "--m", "6", "--samples", "20"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "kind,k,x,y"
    assert sum(1 for ln in lines if ln.startswith("curve")) == 21
    assert sum(1 for ln in lines if ln.startswith("point")) == 7
    assert run(["ball-data", "--alpha", "neg:e+3", "--p", "1/2", "--step", "1", "--samples", "10"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "kind,index,x,y"
    assert any(ln.startswith("next,1,7,") for ln in lines)
    assert any(ln.startswith("prev,0,1,") for ln in lines)


def test_help_lists_csv_layouts(capsys):
    assert run(["--help"]) == 0
    assert "gm_bound_lo" in capsys.readouterr().out


def test_serialization_round_trip():
    for x in (Fraction(3), Fraction(-7, 12), Fraction(2**80 + 1, 3**40)):
        assert parse_rational(json.loads(json.dumps(rational_json(x)))) == x
    r = sqrt(2)
    enc = json.loads(json.dumps(to_jsonable(r)))
    lo, hi = parse_interval(enc)
    iv = r.at(128)
    a, b = iv.fractions()
    assert lo <= a and b <= hi and hi - lo < Fraction(1, 10**35)
    tiny = Interval.exact(Fraction(1, 3**200), 128)
    lo, hi = parse_interval(to_jsonable(tiny))
    a, b = tiny.fractions()
    assert lo <= a and b <= hi
    nested = {"a": [Fraction(1, 2), 3, None, True], "b": "x"}
    assert to_jsonable(nested) == {"a": ["1/2", 3, None, True], "b": "x"}

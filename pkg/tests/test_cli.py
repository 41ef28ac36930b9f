import json
from pathlib import Path

import pytest

from qmpc.cli import main
from qmpc.scenario import ScenarioError, parse_scenario, run_scenario, scenario_from_dict
from qmpc.network import Transcript
from qmpc.selftest import SUITES, selftest

ROOT = Path(__file__).resolve().parents[1]


def write(tmp_path, data, name="s.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


def test_parse_valid_vqss(tmp_path):
    sc = parse_scenario(write(tmp_path, {"mode": "vqss", "params": {"n": 5, "t": 1, "p": 7, "k": 4}}))
    assert sc.mode == "vqss" and sc.config.k == 4 and sc.trials == 1


def test_parse_regime_violation(tmp_path):
    with pytest.raises(ScenarioError) as info:
        parse_scenario(write(tmp_path, {"mode": "vqss", "params": {"n": 5, "t": 2, "p": 7}}))
    assert info.value.field == "params" and "4t+1" in str(info.value)


def test_parse_missing_circuit(tmp_path):
    with pytest.raises(ScenarioError) as info:
        parse_scenario(write(tmp_path, {"mode": "mpqc"}))
    assert info.value.field == "circuit"


@pytest.mark.parametrize(
    "data,field",
    [
        ({"mode": "quantum"}, "mode"),
        ({"mode": "vqss", "strategy": {"name": "sneaky"}}, "strategy.name"),
        ({"mode": "vqss", "trials": 0}, "trials"),
        ({"mode": "vqss", "k_sweep": [0]}, "k_sweep"),
        ({"mode": "vqss", "params": {"q": 1}}, "params"),
        ({"mode": "vqss", "input": "one"}, "input"),
    ],
)
def test_parse_field_errors(data, field):
    with pytest.raises(ScenarioError) as info:
        scenario_from_dict(data)
    assert info.value.field == field


def test_json_syntax_error_reports_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n "mode": "vqss",\n oops\n}')
    with pytest.raises(ScenarioError) as info:
        parse_scenario(path)
    assert "line 3" in info.value.field


def test_honest_vqss_ten_trials(tmp_path):
    sc = parse_scenario(ROOT / "scenarios" / "vqss_honest.json")
    report = run_scenario(sc, tmp_path)
    r = report.results["per_k"][4]
    assert report.ok and r["accepted"] == 10 and r["min_fidelity"] == 1.0
    assert 0.0 <= r["catch_rate"] <= 1.0
    saved = json.loads((tmp_path / "report.json").read_text())
    assert saved["ok"] and saved["seed"] == 1
    tr = Transcript.read(tmp_path / "transcript_k4.jsonl")
    assert len(tr) > 0 and Transcript.from_jsonl(tr.to_jsonl()) == tr


def test_reports_reproducible(tmp_path):
    sc = scenario_from_dict({"mode": "vqss", "params": {"k": 1, "corrupt": [1], "seed": 3},
                             "strategy": "lying_broadcaster", "trials": 3})
    a = run_scenario(sc).to_dict()
    b = run_scenario(sc).to_dict()
    a.pop("wall_time"), b.pop("wall_time")
    assert a == b


def test_mpqc_scenario_with_tamper(tmp_path):
    sc = parse_scenario(ROOT / "scenarios" / "mpqc_toffoli_tamper.json")
    sc.trials = 1
    report = run_scenario(sc)
    assert report.ok and report.results["match_rate"] == 1.0


def test_unsupported_backend_is_a_report_entry():
    sc = scenario_from_dict({"mode": "vqss", "backend": "dense"})
    report = run_scenario(sc)
    assert not report.ok and "backend" in report.failures[0]


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["codec"]) == 0
    assert main(["vqss", "--n", "5", "--t", "2"]) == 2
    assert "4t+1" in capsys.readouterr().err
    out = tmp_path / "o"
    assert main(["vqss", "--trials", "2", "--k-sweep", "1,2", "--seed", "5", "--out", str(out)]) == 0
    assert (out / "report.json").exists() and (out / "transcript_k2.jsonl").exists()
    report = json.loads((out / "report.json").read_text())
    assert set(report["results"]["per_k"]) == {"1", "2"}


def test_cli_failed_expectation_exits_nonzero(tmp_path):
    path = write(tmp_path, {"mode": "vqss", "params": {"k": 1, "corrupt": [0]},
                            "strategy": {"name": "bad_branch_dealer"}, "trials": 5,
                            "expect": {"max_catch_rate": 0.0}})
    assert main(["vqss", "--scenario", str(path)]) == 1


def test_cli_mode_mismatch(tmp_path):
    path = write(tmp_path, {"mode": "mpqc", "circuit": "x"})
    assert main(["vqss", "--scenario", str(path)]) == 2


def test_selftest_all_pass_and_deterministic():
    a = selftest(seed=0)
    assert a == {s: True for s in SUITES}
    da, db = {}, {}
    selftest(seed=0, details=da, suites=("field_codes", "vqss"))
    selftest(seed=0, details=db, suites=("field_codes", "vqss"))
    assert da == db


@pytest.mark.parametrize("suite", SUITES)
def test_selftest_injected_fault_is_isolated(suite):
    out = selftest(seed=0, inject=suite)
    assert out[suite] is False
    assert all(ok for name, ok in out.items() if name != suite)


def test_cli_selftest(capsys):
    assert main(["selftest"]) == 0
    assert main(["selftest", "--inject", "css_code"]) == 1
    lines = capsys.readouterr().out.splitlines()
    assert any(l.startswith("css_code") and "FAIL" in l for l in lines)

import json
import subprocess
import sys

import pytest

from nashpeering.cli import EXIT_CLAIM_FAILED, EXIT_OK, EXIT_USAGE, main
from nashpeering.documents import topology_to_doc
from nashpeering.fixtures import three_as_transit


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_evaluate_three_as(capsys):
    code, out, _ = run_cli(capsys, "evaluate", "--topology", "builtin:three-as-transit", "--pair", "A,B")
    assert code == EXIT_OK
    doc = json.loads(out)
    (g,) = [g for g in doc["groups"] if g["exporter"] == "A"]
    assert (g["settlement"]["surplus"], g["settlement"]["price"]) == (10_000_000, 3_000_000)
    assert doc["net_settlement"]["payer"] == "B pays A"
    assert doc["config"]["topology_sha256"]


def test_evaluate_from_file_and_text_format(capsys, tmp_path):
    st = three_as_transit()
    path = tmp_path / "t.json"
    path.write_text(json.dumps(topology_to_doc(st.topology, st.demands)))
    code, out, _ = run_cli(capsys, "evaluate", "--topology", str(path), "--pair", "A,B", "--format", "text")
    assert code == EXIT_OK
    assert "surplus=10" in out and "r=3" in out and "net 3 (B pays A)" in out


def test_dynamics_reports_are_byte_identical(capsys, tmp_path):
    outs = []
    for name in ("one.json", "two.json"):
        code, _, _ = run_cli(capsys, "dynamics", "--topology", "builtin:oscillator", "--order", "random",
                             "--seed", "7", "--out", str(tmp_path / name))
        assert code == EXIT_OK
        outs.append((tmp_path / name).read_bytes())
    assert outs[0] == outs[1]
    doc = json.loads(outs[0])
    assert doc["outcome"] == "cycle-detected" and doc["cycle_length"] == 2
    assert doc["config"]["seed"] == 7 and doc["config"]["order"] == "random"


def test_dynamics_candidate_pairs(capsys):
    code, out, _ = run_cli(capsys, "dynamics", "--topology", "builtin:three-as-transit", "--candidate", "A,B")
    doc = json.loads(out)
    assert code == EXIT_OK and doc["outcome"] == "fixpoint" and doc["rounds_executed"] <= 2
    code, _, err = run_cli(capsys, "dynamics", "--topology", "builtin:three-as-transit", "--candidate", "A,C")
    assert code == EXIT_USAGE and "already linked" in err


def test_game_table(capsys):
    code, out, _ = run_cli(capsys, "game", "--surplus", "10", "--p", "0.5,0.1,1", "--horizon", "50")
    rows = json.loads(out)["rows"]
    assert code == EXIT_OK and [r["p"] for r in rows] == [0.5, 0.1, 1]
    assert rows[0]["proposer"] == pytest.approx(20 / 3)
    code, out, _ = run_cli(capsys, "game", "--surplus", "10", "--p", "1", "--format", "text")
    assert "ultimatum" in out


@pytest.mark.parametrize("name", ["ap-cp", "traffic-ratio", "tier1", "high-cost-route"])
def test_scenarios_exit_zero(capsys, name):
    code, out, _ = run_cli(capsys, "scenario", name)
    doc = json.loads(out)
    assert code == EXIT_OK and doc["passed"] and all(c["passed"] for c in doc["claims"])


def test_traffic_ratio_gamma(capsys):
    code, out, _ = run_cli(capsys, "scenario", "traffic-ratio", "--gamma", "5", "--format", "text")
    assert code == EXIT_OK and "PASS" in out


def test_estimate(capsys):
    code, out, _ = run_cli(capsys, "estimate", "--topology", "builtin:common-provider", "--estimator", "B",
                           "--peer", "A")
    doc = json.loads(out)
    assert code == EXIT_OK
    g = [g for g in doc["groups"] if g["status"] == "estimated"][0]
    assert g["est_cost_outside"] == g["true_cost_outside"]
    code, out, _ = run_cli(capsys, "estimate", "--topology", "builtin:common-provider", "--estimator", "B",
                           "--peer", "A", "--degrade", "truncate=1", "--format", "text")
    assert code == EXIT_OK and "estimating A" in out


def test_fixture_command_round_trips(capsys, tmp_path):
    code, out, _ = run_cli(capsys, "fixture", "tier1")
    assert code == EXIT_OK
    path = tmp_path / "tier1.json"
    path.write_text(out)
    code, _, _ = run_cli(capsys, "evaluate", "--topology", str(path), "--pair", "N,T1")
    assert code == EXIT_OK


@pytest.mark.parametrize(
    "argv, message",
    [
        (["scenario", "nope"], "unknown scenario"),
        (["evaluate", "--topology", "builtin:three-as-transit", "--pair", "A,Z"], "unknown AS id 'Z'"),
        (["evaluate", "--topology", "builtin:three-as-transit", "--pair", "A"], "--pair"),
        (["evaluate", "--topology", "builtin:nowhere", "--pair", "A,B"], "unknown builtin"),
        (["game", "--surplus", "10", "--p", "1.5"], "breakdown probability"),
        (["game", "--surplus", "-1", "--p", "0.5"], "surplus"),
        (["estimate", "--topology", "builtin:common-provider", "--estimator", "A", "--peer", "A"], "must differ"),
        (["estimate", "--topology", "builtin:common-provider", "--estimator", "A", "--peer", "B",
          "--degrade", "bogus"], "unknown degradation"),
    ],
)
def test_usage_errors(capsys, argv, message):
    code, out, err = run_cli(capsys, *argv)
    assert code == EXIT_USAGE and out == ""
    assert message in err


def test_invalid_topology_files(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"ases": [{"id": "A"}, {"id": "B"}],
                               "links": [{"a": "A", "b": "B", "kind": "customer-provider", "location": "x"},
                                         {"a": "B", "b": "A", "kind": "customer-provider", "location": "y"}],
                               "destinations": []}))
    code, _, err = run_cli(capsys, "evaluate", "--topology", str(bad), "--pair", "A,B")
    assert code == EXIT_USAGE and "invalid topology" in err
    bad.write_text("[]")
    code, _, err = run_cli(capsys, "evaluate", "--topology", str(bad), "--pair", "A,B")
    assert code == EXIT_USAGE
    code, _, err = run_cli(capsys, "evaluate", "--topology", str(tmp_path / "none.json"), "--pair", "A,B")
    assert code == EXIT_USAGE and "cannot read" in err


def test_argparse_errors_exit_two():
    with pytest.raises(SystemExit) as exc:
        main(["dynamics"])
    assert exc.value.code == EXIT_USAGE


def test_failed_claim_exits_one(capsys, monkeypatch):
    from nashpeering.scenarios import SCENARIOS, ScenarioResult

    def broken():
        res = ScenarioResult("broken", {})
        res.check("one and one make three", 1 + 1 == 3, got=2)
        return res

    monkeypatch.setitem(SCENARIOS, "broken", broken)
    code, out, _ = run_cli(capsys, "scenario", "broken")
    assert code == EXIT_CLAIM_FAILED
    assert json.loads(out)["claims"][0] == {"text": "one and one make three", "passed": False, "witness": {"got": 2}}


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "nashpeering.cli", "scenario", "high-cost-route", "--format", "text"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "PASS" in proc.stdout

import json
from pathlib import Path

from cfk.cli import main

FIXTURES = Path(__file__).parent / "fixtures"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_enumerate_exit_codes(capsys):
    code, out, _ = run(capsys, "enumerate", "--quiver", "A2")
    assert code == 0 and json.loads(out)["clusters"] == 5
    code, out, _ = run(capsys, "enumerate", "--quiver", "Atilde:1,2", "--max-clusters", "100")
    data = json.loads(out)
    assert code == 2 and not data["exhausted"] and data["summary"].endswith("partial")


def test_bad_input_exits_1(capsys, tmp_path):
    assert run(capsys, "trace", "--quiver", "A2", "--sink", "vertex:99", "--start", "cell:1,3")[0] == 1
    assert run(capsys, "enumerate", "--quiver", "nope")[0] == 1
    bad = tmp_path / "bad.cfg"
    bad.write_text("budget\n")
    assert run(capsys, "enumerate", "--config", str(bad))[0] == 1
    code, _, err = run(capsys, "homology", "--quiver", "Atilde:1,2", "--max-clusters", "40")
    assert code == 1 and "exhausted" in err


def test_verify(capsys):
    code, out, _ = run(capsys, "verify", "--quiver", "A3", "--which", "green", "--which", "homology")
    assert code == 0 and json.loads(out) == {"green": "pass", "homology": "pass"}
    code, out, _ = run(capsys, "verify", "--quiver", "A2", "--which", "polygons", "--which", "duality")
    assert code == 0
    code, out, _ = run(capsys, "verify", "--quiver", "Atilde:1,2", "--max-clusters", "30", "--which", "homology")
    assert code == 1


def test_config_env_and_flag_precedence(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "cfk.cfg"
    cfg.write_text("# quiver and budget\nquiver = A3\nbudget = 1\n")
    argv = ["trace", "--config", str(cfg), "--sink", "vertex:0", "--start", "cell:6,7,8"]
    _, out, _ = run(capsys, *argv)
    assert json.loads(out)["status"] == "BudgetExhausted"
    monkeypatch.setenv("CFK_BUDGET", "100")
    _, out, _ = run(capsys, *argv)
    assert json.loads(out)["status"] == "ReachedSink"
    _, out, _ = run(capsys, *argv, "--budget", "1")
    assert json.loads(out)["status"] == "BudgetExhausted"


def test_exports(capsys, tmp_path):
    code, out, _ = run(capsys, "export-complex", "--quiver", "A3", "--format", "dot")
    assert code == 0 and out.startswith("graph") and out.count("--") == 21
    target = tmp_path / "a3.json"
    run(capsys, "export-complex", "--quiver", "A3", "-o", str(target))
    data = json.loads(target.read_text())
    assert len(data["clusters"]) == 14
    code, out, _ = run(capsys, "export-fan", "--quiver", "A3")
    assert code == 0 and out.count("<circle") == 9
    assert run(capsys, "export-fan", "--quiver", "D4")[0] == 1


def test_green_outputs(capsys):
    code, out, _ = run(capsys, "green", "--quiver", "A2", "--sequences", "10")
    data = json.loads(out)
    assert code == 0 and data["equal"]
    assert sorted(map(len, data["maximal_green_sequences"])) == [2, 3]
    code, out, _ = run(capsys, "green", "--quiver", "A3", "--base", "0,1,2", "--format", "dot")
    assert code == 0 and out.count("->") == 21
    assert run(capsys, "green", "--quiver", "A3", "--base", "0,1")[0] == 1


def test_homology_and_link(capsys):
    _, out, _ = run(capsys, "homology", "--quiver", "D4", "--smith")
    assert json.loads(out)["betti"] == [0, 0, 0, 1]
    _, out, _ = run(capsys, "homology", "--quiver", "D4", "--link", "0")
    assert json.loads(out)["betti"] == [0, 0, 1]
    _, out, _ = run(capsys, "polygons", "--quiver", "D4")
    assert json.loads(out) == {"h1": 0}


def test_foliate_is_deterministic(capsys):
    argv = ["foliate", "--quiver", "A3", "--sink", "vertex:2", "--samples", "2", "--seed", "7"]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b and json.loads(a)["classification"] == "Compact"


def test_trace_svg_matches_fixture(capsys):
    argv = ["trace", "--quiver", "A2", "--sink", "vertex:0", "--start", "cell:1,3", "--sense", "both", "--format", "svg"]
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert out == (FIXTURES / "a2_trace.svg").read_text()

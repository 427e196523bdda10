import json
import shutil
import subprocess

import pytest

from dynsys import builtin
from dynsys.builtins import NAMES
from dynsys.cli import main
from dynsys.sysdef import parse_system_def


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_check_exit_codes(capsys):
    code, out, _ = run(capsys, "check", "--system", "simple", "--criterion", "6", "--range", "1:10000")
    assert code == 0 and out.startswith("C6: Pass")
    code, out, _ = run(capsys, "check", "--system", "collatz-reduced", "--criterion", "6", "--range", "1:100")
    assert code == 1 and "witness [7, 11]" in out


def test_strict_inconclusive(capsys):
    argv = ["check", "--system", "collatz-reduced", "--criterion", "1", "--other", "mp", "--depth", "3",
            "--count-cap", "3"]
    assert run(capsys, *argv)[0] == 0
    assert run(capsys, *argv, "--strict")[0] == 3


def test_trace_json(capsys):
    code, out, _ = run(capsys, "trace", "--system", "collatz", "--seed", "27", "--format", "json")
    d = json.loads(out)
    assert code == 0
    assert (d["total_stop"], d["max_excursion"]) == (111, 9232)


def test_trace_text_and_limits(capsys):
    code, out, _ = run(capsys, "trace", "--system", "collatz", "--seed", "27", "--max-steps", "10")
    assert code == 0 and "root: ExceededStepBound" in out


def test_usage_errors(capsys):
    assert run(capsys, "trace", "--system", "nope", "--seed", "3")[0] == 2
    assert run(capsys, "trace", "--system", "collatz-reduced", "--seed", "9")[0] == 2
    assert run(capsys, "trace", "--system", "simple", "--seed", "3", "--bogus")[0] == 2
    assert run(capsys, "sweep", "--system", "simple", "--range", "9:3")[0] == 2
    assert run(capsys, "reduce", "--system", "simple", "--range", "1:15", "--block", "4", "--delegate", "1")[0] == 2
    code, _, err = run(capsys, "check", "--system", "simple", "--criterion", "1")
    assert code == 2 and "--other" in err


def test_parse_error_from_file(tmp_path, capsys):
    bad = tmp_path / "bad.dsys"
    bad.write_text('name = bad\nadmit = "n >= 1"\nif n % 2 = 1  (n-1)/2\n')
    code, _, err = run(capsys, "show", "--system", str(bad))
    assert code == 2 and "line 3" in err


@pytest.mark.parametrize("name", NAMES)
def test_show_round_trip(name, tmp_path, capsys):
    path = tmp_path / f"{name}.dsys"
    assert run(capsys, "show", "--system", name, "--format", "dsys", "--output", str(path))[0] == 0
    again = parse_system_def(path.read_text())
    original = builtin(name)
    assert again == original
    assert [str(r) for r in again.forward] == [str(r) for r in original.forward]
    code, out, _ = run(capsys, "trace", "--system", str(path), "--seed", "5")
    assert code == 0 and "root:" in out


def test_sweep_outputs(capsys, tmp_path):
    code, out, _ = run(capsys, "sweep", "--system", "collatz", "--range", "1:1000")
    assert code == 0 and "Cycle(1,4,2): 1000" in out and "non-converged: 0" in out
    csv_path = tmp_path / "s.csv"
    run(capsys, "sweep", "--system", "simple", "--range", "1:4", "--format", "csv", "-o", str(csv_path))
    assert csv_path.read_text().splitlines()[:2] == ["seed,root_kind,root_value,steps,total_stop,max_excursion",
                                                      "1,fixed,1,0,0,1"]
    code, out, _ = run(capsys, "sweep", "--system", "simple", "--range", "1:4", "--format", "json", "--no-jit")
    assert json.loads(out)["tallies"] == {"FixedPoint(1)": 4}


def test_reverse_outputs(capsys):
    code, out, _ = run(capsys, "reverse", "--system", "simple", "--depth", "2")
    assert code == 0 and "canonical form: ((()())(()()))" in out
    code, out, _ = run(capsys, "reverse", "--system", "simple", "--depth", "2", "--format", "dot")
    assert out.count("->") == 6 and out.count("label=") == 7
    code, out, _ = run(capsys, "reverse", "--system", "simple", "--depth", "0", "--format", "dot")
    assert out.count("label=") == 1 and "->" not in out
    code, out, _ = run(capsys, "reverse", "--system", "collatz-reduced", "--depth", "1", "--param-cap", "12",
                       "--format", "json")
    d = json.loads(out)
    assert [n["value"] for n in d["nodes"]] == [1, 5, 85, 341]


def test_reduce_script(tmp_path, capsys):
    script = tmp_path / "steps.txt"
    script.write_text("# collapse then contract\nblock2 cycle=1,4,2\nblock1 chain=16,8,1 keep=last\n")
    code, out, _ = run(capsys, "reduce", "--system", "collatz", "--range", "1:20", "--script", str(script),
                       "--format", "json")
    g = json.loads(out)
    assert code == 0
    assert [e["block"] for e in g["log"]] == [2, 1]
    assert {n["id"] for n in g["nodes"]} == set(range(1, 21)) - {2, 4, 8, 16}
    script.write_text("block9 x=1\n")
    code, _, err = run(capsys, "reduce", "--system", "collatz", "--range", "1:20", "--script", str(script))
    assert code == 2 and "steps.txt:1" in err


def test_check_c5_with_blocks(capsys):
    code, out, _ = run(capsys, "check", "--system", "collatz", "--criterion", "5", "--range", "1:10", "--strict")
    assert code == 3 and "Inconclusive" in out
    code, out, _ = run(capsys, "check", "--system", "simple", "--criterion", "5", "--range", "1:15")
    assert code == 0 and "Pass" in out


def test_export(capsys, tmp_path):
    path = tmp_path / "g.dot"
    assert run(capsys, "export", "graph", "--system", "collatz", "--range", "1:10", "-o", str(path))[0] == 0
    assert "style=dashed" in path.read_text()
    code, out, _ = run(capsys, "export", "tree", "--system", "simple", "--depth", "1", "--format", "json")
    assert len(json.loads(out)["nodes"]) == 3


def test_byte_determinism(tmp_path, capsys):
    outs = []
    for i in range(2):
        path = tmp_path / f"c4-{i}.json"
        run(capsys, "check", "--system", "mp", "--criterion", "4", "--format", "json", "-o", str(path))
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    dots = [run(capsys, "export", "graph", "--system", "mp", "--range", "1:300")[1] for _ in range(2)]
    assert dots[0] == dots[1]


def test_sampling_seed_env(capsys, monkeypatch):
    a = run(capsys, "check", "--system", "mp", "--criterion", "4", "--format", "json")[1]
    monkeypatch.setenv("DYNSYS_SEED", "99")
    b = run(capsys, "check", "--system", "mp", "--criterion", "4", "--format", "json")[1]
    assert json.loads(a)["scope"]["sampling_seed"] == 20240607
    assert json.loads(b)["scope"]["sampling_seed"] == 99


@pytest.mark.skipif(shutil.which("dynsys") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["dynsys", "check", "--system", "collatz-reduced", "--criterion", "6", "--range", "1:100"],
                         capture_output=True, text=True)
    assert res.returncode == 1
    assert "C6: Fail" in res.stdout

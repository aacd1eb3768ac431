import json

import pytest

from dynmember.cli import main


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_run_writes_report(tmp_path):
    script = write(tmp_path, "s.txt", "root b\naddchild 0 a -> $x\nrelabel $x b\nquery 0 expect true\n")
    out = tmp_path / "r.json"
    assert main(["run", "--mode", "tree", "--script", script, "--report", str(out),
                 "--oracle-check"]) == 0
    rep = json.loads(out.read_text())
    assert [o["op"] for o in rep["ops"]] == ["addchild", "relabel", "query"]
    assert rep["oracle_check"] == []
    assert all({"work", "rounds", "threads-live", "violations"} <= set(o) for o in rep["ops"])


def test_run_string_modes(tmp_path, capsys):
    script = write(tmp_path, "s.txt", "word ( ( ) )\nquery 1 4 expect true\nrelabel 2 )\n"
                                      "query 1 4 expect false\n")
    assert main(["run", "--mode", "dcfl", "--theta", "1/2", "--script", script]) == 0
    assert main(["run", "--mode", "vpl", "--theta", "1/2", "--script", script,
                 "--oracle-check"]) == 0
    capsys.readouterr()


def test_missing_file(tmp_path, capsys):
    assert main(["run", "--mode", "tree", "--script", str(tmp_path / "none.txt")]) == 2
    assert "error" in capsys.readouterr().err


def test_bad_theta(tmp_path):
    script = write(tmp_path, "s.txt", "")
    assert main(["run", "--mode", "tree", "--theta", "1/2", "--script", script]) == 2
    assert main(["run", "--mode", "tree", "--theta", "half", "--script", script]) == 2


def test_failed_expectation(tmp_path, capsys):
    script = write(tmp_path, "s.txt", "root a\nquery 0 expect true\n")
    assert main(["run", "--mode", "tree", "--script", script]) == 1
    err = capsys.readouterr().err
    assert "expected: true" in err and "got:      false" in err


def test_wrong_automaton_kind(tmp_path, capsys):
    from dynmember.automata import automaton_to_json
    from dynmember.fixtures import parity_a
    path = tmp_path / "dta.json"
    path.write_text(json.dumps(automaton_to_json(parity_a())))
    script = write(tmp_path, "s.txt", "")
    assert main(["run", "--mode", "vpl", "--automaton", str(path), "--script", script]) == 2
    assert main(["run", "--mode", "tree", "--automaton", str(path), "--script", script]) == 0
    (tmp_path / "bad.json").write_text("{not json")
    assert main(["run", "--mode", "tree", "--automaton", str(tmp_path / "bad.json"),
                 "--script", script]) == 2


def test_bench_json_lines(tmp_path, capsys):
    args = ["bench", "--mode", "tree", "--sizes", "30,60,120", "--ops", "8", "--fit",
            "--seed", "4"]
    assert main(args) == 0
    first = capsys.readouterr().out
    rows = [json.loads(line) for line in first.splitlines()]
    assert any("fit" in r and "slope" in r for r in rows)
    assert {r["n"] for r in rows if "n" in r} == {30, 60, 120}
    assert main(args) == 0
    assert capsys.readouterr().out == first


def test_bench_needs_three_sizes_for_fit(capsys):
    assert main(["bench", "--mode", "tree", "--sizes", "64", "--fit"]) == 2
    assert main(["bench", "--mode", "tree", "--sizes", "64,32"]) == 2

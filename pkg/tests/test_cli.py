from __future__ import annotations

import csv
import json

from stopsim.cli import main


def test_gen_run_report(tmp_path, capsys):
    inst = tmp_path / "p.json"
    assert main(["gen", "random-prophet", "--n", "5", "--seed", "2", "--out", str(inst)]) == 0
    assert json.loads(inst.read_text())["kind"] == "downward"
    out = tmp_path / "p.csv"
    rc = main(["run", "--instance", str(inst), "--alg", "prophet01", "greedy",
               "--mode", "exact", "--out", str(out)])
    assert rc == 0
    rows = list(csv.DictReader(out.open()))
    assert [r["algorithm"] for r in rows] == ["prophet01", "greedy"]
    assert (tmp_path / "p.report.json").exists()
    assert inst.exists() and json.loads(inst.read_text())["version"] == 1

    sec = tmp_path / "s.json"
    main(["gen", "random-secretary", "--n", "6", "--out", str(sec)])
    out2 = tmp_path / "s.csv"
    rc = main(["run", "--instance", str(sec), "--alg", "secretary01", "--c-scale", "1",
               "--trials", "50", "--out", str(out2)])
    assert rc == 0
    capsys.readouterr()
    assert main(["report", "--merge", str(out), str(out2)]) == 0
    text = capsys.readouterr().out
    assert text.count("\n") == 4


def test_check_exit_codes(capsys):
    assert main(["check", "--suite", "symmetry", "--params", '{"fixtures": 2}']) == 0
    assert "swap-symmetry" in capsys.readouterr().out


def test_errors_give_nonzero(tmp_path):
    inst = tmp_path / "nm.json"
    main(["gen", "nm-prophet-lb", "--n", "4", "--out", str(inst)])
    assert main(["run", "--instance", str(inst), "--alg", "prophet01"]) == 2
    assert main(["run", "--instance", str(tmp_path / "missing.json"), "--alg", "greedy"]) == 2


def test_other_generators(tmp_path):
    for args in (["hadamard", "--n", "8", "--i-star", "1"], ["partition-lb", "--n", "16"],
                 ["uniform-matroid", "--n", "5", "--k", "2", "--p", "0.3"],
                 ["uniform-matroid", "--n", "4", "--k", "2"]):
        assert main(["gen", *args, "--out", str(tmp_path / "g.json")]) == 0

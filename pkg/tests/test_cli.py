from __future__ import annotations

import json
import os
import re

import pytest

from oracles import dp_distance
from wedit.align_graph import Alignment, WeightFunction
from wedit.cli import main

DATA = os.path.join(os.path.dirname(__file__), "data")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_examples_plain(capsys):
    assert run(capsys, "dist", "--unit", "kitten", "sitting") == (0, "3\n", "")
    assert run(capsys, "dist", "ab", "c", "--weights", os.path.join(DATA, "footnote.w")) == (0, "2\n", "")
    assert run(capsys, "sed", "a", "--k", "4") == (0, "2\n", "")
    assert run(capsys, "sed", "abcdef", "--k", "4") == (0, ">4\n", "")


def test_json_reports(capsys):
    code, out, _ = run(capsys, "align", "kitten", "sitting", "--json")
    rep = json.loads(out)
    assert code == 0 and rep["command"] == "align" and rep["k"] == 3
    assert set(rep) <= {"command", "k", "alignment", "counters"}
    assert rep["alignment"]["cigar"] == "1X3M1X1M1I"


def test_align_output_recosts(tmp_path, capsys):
    fa = tmp_path / "x.fa"
    fa.write_text(">one\nACGTAC\nGTTA\n>two\nCCCC\n")
    code, out, _ = run(capsys, "align", str(fa), "ACGTTCGTA")
    assert code == 0
    k, pts, cigar = out.splitlines()
    a = Alignment([tuple(map(int, p)) for p in re.findall(r"\((\d+),(\d+)\)", pts)])
    w = WeightFunction.unit()
    assert a.cost(b"ACGTACGTTA", b"ACGTTCGTA", w) == int(k) == dp_distance(b"ACGTACGTTA", b"ACGTTCGTA", w)


def test_dynamic_replay_matches_dist(tmp_path, capsys):
    script = tmp_path / "s.txt"
    script.write_text("X sub 0 s\nX sub 4 i\nX ins 6 g\nY del 0\nY ins 0 q\n")
    code, out, _ = run(capsys, "dynamic", "kitten", "sitting", "--script", str(script))
    assert code == 0
    x, y = b"kitten", b"sitting"
    from wedit.dynamic_solver import parse_script

    want = []
    for e in parse_script(script.read_text()):
        if e.side == "X":
            x = e.apply(x)
        else:
            y = e.apply(y)
        want.append(str(dp_distance(x, y, WeightFunction.unit())))
    assert out.split() == want


def test_exit_codes(tmp_path, capsys):
    bad_w = tmp_path / "bad.w"
    bad_w.write_text("alphabet: ab\n0 0 1\n1 0 1\n1 1 0\n")
    assert run(capsys, "dist", "ab", "ab", "--weights", str(bad_w))[0] == 2
    assert run(capsys, "dist", "ab", "xy", "--weights", os.path.join(DATA, "footnote.w"))[0] == 2
    assert run(capsys, "dist", "kitten", "sitting", "--k", "2")[0] == 1
    script = tmp_path / "s.txt"
    script.write_text("X del 99\n")
    assert run(capsys, "dynamic", "a", "b", "--script", str(script))[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["dist", "onlyone"])
    assert exc.value.code == 2


def test_bench_csv(capsys):
    code, out, _ = run(capsys, "bench", "--n", "2000", "--k", "4", "--reps", "1")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "n,k,W,wall_ms,op_counters"
    n, k, W, ms, ops = lines[1].split(",", 4)
    assert n == "2000" and int(k) <= 4 and W == "1" and float(ms) >= 0


def test_selftest(capsys):
    code, out, _ = run(capsys, "selftest", "--quick")
    assert code == 0 and "FAIL" not in out

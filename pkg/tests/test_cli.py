import json
import subprocess
import sys

import pytest

from fuzzysat.cli import EXIT_NO, EXIT_OK, EXIT_USAGE, main

HEAD = "(declare-const i0 (_ BitVec 8))\n(declare-const i1 (_ BitVec 8))\n"


@pytest.fixture
def write(tmp_path):
    def _w(name, body):
        p = tmp_path / name
        p.write_text(HEAD + body)
        return p
    return _w


def test_solve_i2s(write, capsys, tmp_path):
    p = write("q.smt2", "(assert (= (concat i1 i0) #xABCD))")
    assert main(["solve", str(p), "--oracle-check", "--stats-json", str(tmp_path / "s.json")]) == EXIT_OK
    out = capsys.readouterr().out
    assert "status: sat" in out and "testcase: CD AB" in out and "attribution: I2S" in out
    assert "oracle: sat (agree)" in out and "missed: 0" in out
    assert (tmp_path / "q.testcase").read_bytes() == b"\xcd\xab"
    stats = json.loads((tmp_path / "s.json").read_text())
    assert stats["status"] == "sat" and stats["testcase"] == "cdab"


def test_missed_sat_is_counted(write, capsys):
    # 7 * g == 0x1235 has a single model; no mutation family reaches it
    p = write("m.smt2", "(assert (= (bvmul (concat i1 i0) #x0007) #x1235))")
    assert main(["solve", str(p), "--oracle-check"]) == EXIT_NO
    out = capsys.readouterr().out
    assert "status: unknown" in out and "oracle: missed-sat" in out and "missed: 1" in out


def test_proven_unsat_exit(write, capsys, tmp_path):
    p = write("u.smt2", "(assert (bvuge i0 #x05))\n(assert (= i0 #x01))")
    (tmp_path / "u.seed").write_bytes(b"\x05\x00")
    assert main(["solve", str(p), "--oracle-check"]) == EXIT_NO
    out = capsys.readouterr().out
    assert "status: proven-unsat" in out and "oracle: unsat (agree)" in out


def test_usage_errors(write, tmp_path, capsys):
    bad = tmp_path / "bad.smt2"
    bad.write_text("(assert (= i0")
    assert main(["solve", str(bad)]) == EXIT_USAGE
    assert "bad.smt2:" in capsys.readouterr().err
    assert main(["solve", str(tmp_path / "missing.smt2")]) == EXIT_USAGE
    assert main(["bogus"]) == EXIT_USAGE
    p = write("q.smt2", "(assert (= i0 #x01))")
    assert main(["solve", str(p), "--families", "NOPE"]) == EXIT_USAGE
    assert main(["solve", str(p), "--primitive", "max"]) == EXIT_USAGE
    assert main(["corpus", str(tmp_path / "nodir")]) == EXIT_USAGE


def test_extrema(write, capsys):
    p = write("x.smt2", "(assert (bvule (concat i1 i0) #x001e))\n(maximize (concat i1 i0))")
    assert main(["solve", str(p), "--oracle-check"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "value: 0x1e" in out and "oracle: min=0x0 max=0x1e" in out
    p = write("a.smt2", "(assert (bvult i0 #x03))\n(enumerate i0)")
    assert main(["solve", str(p)]) == EXIT_OK
    assert "values: 0x0 0x1 0x2" in capsys.readouterr().out
    assert main(["solve", str(p), "--primitive", "min"]) == EXIT_OK
    assert "value: 0x0" in capsys.readouterr().out


def test_oracle_check_command(write, capsys):
    p = write("q.smt2", "(assert (= (concat i1 i0) #xABCD))")
    assert main(["oracle-check", str(p)]) == EXIT_OK
    assert "model: CD AB" in capsys.readouterr().out
    assert main(["oracle-check", str(p), "--oracle-cap", "8"]) == EXIT_USAGE


def test_gen_and_corpus(tmp_path, capsys):
    d = tmp_path / "c"
    assert main(["gen-corpus", str(d), "--count", "12", "--max-bytes", "2"]) == EXIT_OK
    assert len(list(d.glob("*.smt2"))) == 12
    out = tmp_path / "r.json"
    assert main(["corpus", str(d), "-o", str(out), "--body-only"]) == EXIT_OK
    rep = json.loads(out.read_text())
    assert rep["header"]["files"] == 12 and "timing" not in rep
    assert sum(rep["aggregate"]["status"].values()) == 12


def test_module_entry_point(write):
    p = write("q.smt2", "(assert (= i0 #x2a))")
    r = subprocess.run([sys.executable, "-m", "fuzzysat", "solve", str(p)], capture_output=True, text=True)
    assert r.returncode == 0 and "testcase: 2A" in r.stdout

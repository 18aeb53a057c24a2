from __future__ import annotations

import subprocess
import sys

import pytest

from spurion.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def toh(tmp_path, capsys):
    path = tmp_path / "toh.psvn"
    code, out, _ = run(capsys, "gen", "ToH-stack 4 3", "-o", str(path), "--validate")
    assert code == 0 and "reachable 81" in out
    (tmp_path / "a.abs").write_text("map 1 <- 1,2\n")
    return tmp_path, path


def test_gen_writes_domain_and_meta(toh):
    tmp, path = toh
    assert path.read_text().startswith("domain ")
    assert "pegs 1:" in path.with_suffix(".meta").read_text()


def test_enumerate(toh, capsys):
    tmp, path = toh
    code, out, _ = run(capsys, "enumerate", str(path), "--dump", str(tmp / "r.bin"))
    assert code == 0
    assert "reachable 81" in out and "avg_distance 10.0000" in out
    assert (tmp / "r.bin").stat().st_size > 0


def test_mutex_methods(toh, capsys):
    tmp, path = toh
    _, exh, _ = run(capsys, "mutex", str(path))
    _, h2, _ = run(capsys, "mutex", str(path), "--method", "h2")
    assert set(h2.splitlines()) <= set(exh.splitlines())
    assert all(line.startswith("mutex ") for line in exh.splitlines())


def test_pdb_and_solve(toh, capsys):
    tmp, path = toh
    code, out, _ = run(capsys, "pdb", str(path), "--abstraction", str(tmp / "a.abs"), "--variant", "true",
                       "--avg-h", "-o", str(tmp / "t.pdb"))
    assert code == 0 and "variant TRUE" in out and "avg_h" in out
    start = "h4 4 3 2 1 h0 0 0 0 0 h0 0 0 0 0"
    code, out, _ = run(capsys, "solve", str(path), "--abstraction", str(tmp / "a.abs"), "--pdb", str(tmp / "t.pdb"),
                       "--start", start)
    assert code == 0 and "solution_length 15" in out
    code, out2, _ = run(capsys, "solve", str(path), "--abstraction", str(tmp / "a.abs"), "--variant", "PURE",
                        "--start", start)
    assert code == 0 and "solution_length 15" in out2


def test_generator_spec_as_domain(capsys):
    code, out, _ = run(capsys, "enumerate", "STP-standard 2 2")
    assert code == 0 and "reachable 12" in out and "edges 24" in out


def test_experiment(tmp_path, capsys):
    cfg = tmp_path / "x.cfg"
    cfg.write_text("generator = STP-standard 2 3\nabstraction_inline = map B <- 4,5\nvariants = ORGN, TRUE\n"
                   "samples = 10\nrng_seed = 1\noutput = out\n")
    code, out, _ = run(capsys, "experiment", "--config", str(cfg), "--threads", "2")
    assert code == 0 and out.startswith("variant,entries")
    assert (tmp_path / "out" / "summary.csv").read_text() == out


@pytest.mark.parametrize("argv", [
    ["gen", "NoSuchFamily 3", "-o", "x.psvn"],
    ["enumerate", "missing.psvn"],
    ["enumerate", "STP-dual 4 5"],
    ["pdb", "STP-standard 2 2", "--abstraction", "missing.abs"],
    ["experiment", "--config", "missing.cfg"],
    ["enumerate", "STP-standard 2 2", "--threads", "0"],
])
def test_config_errors_exit_2(argv, capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code, _, err = run(capsys, *argv)
    assert code == 2 and err.startswith("error:")


def test_bad_start_state(capsys, tmp_path):
    (tmp_path / "a.abs").write_text("map B <- 3\n")
    code, _, _ = run(capsys, "solve", "STP-standard 2 2", "--abstraction", str(tmp_path / "a.abs"),
                     "--variant", "ORGN", "--start", "1 2 B 3 3")
    assert code == 2


def test_solve_search_error_exit_6(tmp_path, capsys):
    p = tmp_path / "oneway.psvn"
    p.write_text("domain oneway\nalphabet a b\nlength 1\nop f: a => b\ngoal a\n")
    (tmp_path / "k.abs").write_text("keep 0\n")
    code, _, err = run(capsys, "solve", str(p), "--abstraction", str(tmp_path / "k.abs"), "--variant", "ORGN",
                       "--start", "b")
    assert code == 6


def test_console_script_entry():
    out = subprocess.run([sys.executable, "-m", "spurion.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "experiment" in out.stdout

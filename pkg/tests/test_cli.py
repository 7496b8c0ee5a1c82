import subprocess
import sys

import pytest

from oblivious_ranking.cli import run_cli
from oblivious_ranking.graph import path_graph, write_edge_list, consecutive_matching


def test_lp_reports_bound_check(capsys):
    assert run_cli(["lp", "--n", "50"]) == 0
    out = capsys.readouterr().out
    assert "50" in out and "0.5231664" in out and "pass" in out


def test_lp_exact_and_csv(tmp_path):
    out = tmp_path / "lp.csv"
    assert run_cli(["lp", "--ns", "2,5", "--exact", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# schema=")
    assert lines[1] == "n,value,exact,bound,status"
    assert lines[2] == "2,0.5714286,4/7,0.5231664,pass"


def test_lp_format_export(capsys):
    assert run_cli(["lp", "--n", "3", "--format", "lp"]) == 0
    assert "Subject To" in capsys.readouterr().out
    assert run_cli(["lp", "--ns", "3,4", "--format", "lp"]) == 2


def test_continuous_passes(capsys):
    assert run_cli(["continuous", "--grid", "2000", "--tol", "1e-9", "--ns", "2,5"]) == 0
    out = capsys.readouterr().out
    assert "fail" not in out
    assert "optimal value 0.5231664" in out


def test_continuous_fails_at_impossible_tolerance():
    # the dual row holds only to ~1e-12 numerically
    assert run_cli(["continuous", "--grid", "200", "--tol", "1e-16"]) == 1


def test_simulate_csv_is_byte_reproducible(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["simulate", "--family", "double-bomb", "--n", "5", "--samples", "3000", "--seed", "17"]
    assert run_cli(args + ["--out", str(a)]) == 0
    assert run_cli(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert "seed=17" in a.read_text().splitlines()[0]


def test_simulate_from_file(tmp_path, capsys):
    f = tmp_path / "g.txt"
    f.write_text(write_edge_list(path_graph(4), consecutive_matching(4)))
    assert run_cli(["simulate", "--graph", str(f), "--samples", "100", "--out", "-"]) == 0
    assert capsys.readouterr().out.splitlines()[1] == "nodes,samples,seed,ratio,stderr"


def test_simulate_requires_matching(tmp_path):
    f = tmp_path / "g.txt"
    f.write_text(write_edge_list(path_graph(4)))
    assert run_cli(["simulate", "--graph", str(f)]) == 2


def test_exact(capsys):
    assert run_cli(["exact", "--family", "path", "--n", "4"]) == 0
    assert "7/8" in capsys.readouterr().out
    assert run_cli(["exact", "--family", "path", "--n", "10"]) == 2


def test_verify_single_graph(capsys):
    assert run_cli(["verify", "--family", "cycle", "--n", "6"]) == 0
    assert "pass" in capsys.readouterr().out


def test_hardness_table_small(capsys):
    assert run_cli(["hardness-table", "--eps", "0.63", "--ns", "2,3", "--samples", "500",
                    "--seed", "7", "--out", "-"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("# schema=") and "k=2:1;3:2" in lines[0]
    assert lines[1] == "n,k,nodes,samples,seed,ratio,stderr"
    assert len(lines) == 4


@pytest.mark.parametrize(
    "argv",
    [
        ["lp", "--bogus"],
        ["nosuch"],
        ["simulate", "--family", "double-bomb", "--n", "1", "--eps", "0.3"],
        ["simulate", "--family", "path"],
        ["simulate"],
        ["simulate", "--graph", "/nonexistent/file"],
        ["simulate", "--family", "path", "--n", "4", "--seed", "-1"],
        ["continuous", "--grid", "1"],
        ["lp"],
    ],
)
def test_usage_errors_exit_2(argv):
    assert run_cli(argv) == 2


def test_workers_env_var(monkeypatch, capsys):
    monkeypatch.setenv("OBLIVIOUS_RANKING_WORKERS", "2")
    assert run_cli(["simulate", "--family", "complete", "--n", "6", "--samples", "10"]) == 0
    monkeypatch.setenv("OBLIVIOUS_RANKING_WORKERS", "lots")
    assert run_cli(["simulate", "--family", "complete", "--n", "6", "--samples", "10"]) == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "oblivious_ranking", "lp", "--n", "2"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "0.5714286" in res.stdout

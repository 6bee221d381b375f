import subprocess
import sys

import numpy as np
import pytest

from gsp_sampling.cli import main
from gsp_sampling.fileio import (
    read_rows,
    read_sampling_order,
    read_vector,
    write_signal_batch,
    write_vector,
)


def test_unknown_subcommand_and_flag(capsys):
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 1
    assert "usage" in capsys.readouterr().err
    with pytest.raises(SystemExit) as info:
        main(["bench", "uav", "--colour", "red"])
    assert info.value.code == 1


def test_sample_m_below_k_is_validation_error():
    assert main(["sample", "--graph", "none.mtx", "--method", "omp", "--m", "3", "--k", "5",
                 "--out", "x.csv"]) == 1


def test_missing_file_is_validation_error(tmp_path):
    assert main(["basis", "--graph", str(tmp_path / "nope.mtx"), "--out", str(tmp_path / "b.csv")]) == 1


def test_end_to_end_pipeline(tmp_path):
    g = tmp_path / "g.mtx"
    assert main(["gen-graph", "--n", "40", "--p", "0.3", "--seed", "2", "--out", str(g)]) == 0
    assert main(["basis", "--graph", str(g), "--out", str(tmp_path / "basis.csv")]) == 0
    header, rows = read_rows(tmp_path / "basis.csv")
    assert header[:2] == ["index", "eigenvalue"] and len(rows) == 40
    V = np.array([[float(v) for v in r[2:]] for r in rows]).T
    x = V[:, :6] @ np.arange(1.0, 7.0)
    write_vector(tmp_path / "x.csv", x)
    for method in ("omp", "greedy", "rgreedy", "uniform", "leverage"):
        out = tmp_path / f"s_{method}.csv"
        assert main(["sample", "--graph", str(g), "--k", "6", "--m", "6", "--method", method,
                     "--seed", "3", "--epsilon", "0.4", "--out", str(out)]) == 0
        assert len(read_sampling_order(out)) == 6
    assert main(["reconstruct", "--graph", str(g), "--k", "6", "--samples",
                 str(tmp_path / "s_omp.csv"), "--signal", str(tmp_path / "x.csv"),
                 "--out", str(tmp_path / "xh.csv")]) == 0
    np.testing.assert_allclose(read_vector(tmp_path / "xh.csv"), x, rtol=1e-9, atol=1e-9)
    assert main(["reconstruct", "--graph", str(g), "--k", "6", "--method", "lmmse",
                 "--noise-variance", "0.01", "--samples", str(tmp_path / "s_greedy.csv"),
                 "--signal", str(tmp_path / "x.csv"), "--out", str(tmp_path / "xl.csv")]) == 0
    write_signal_batch(tmp_path / "hist.csv", np.stack([x, 2 * x], axis=1))
    assert main(["support", "--graph", str(g), "--signals", str(tmp_path / "hist.csv"), "--k", "6",
                 "--out", str(tmp_path / "sup.csv"), "--sample-out", str(tmp_path / "ss.csv")]) == 0
    _, sup = read_rows(tmp_path / "sup.csv")
    assert [int(r[0]) for r in sup if r[2] == "true"] == list(range(6))


def test_singular_reconstruction_exits_2(tmp_path):
    # two disjoint edges: nodes 0 and 1 have identical rows on the top eigenspace
    g = tmp_path / "g.mtx"
    g.write_text("%%MatrixMarket matrix coordinate pattern symmetric\n4 4 2\n2 1\n4 3\n")
    (tmp_path / "s.csv").write_text("rank,node_index\n0,0\n1,1\n")
    write_vector(tmp_path / "x.csv", np.ones(4))
    code = main(["reconstruct", "--graph", str(g), "--k", "2", "--samples", str(tmp_path / "s.csv"),
                 "--signal", str(tmp_path / "x.csv"), "--out", str(tmp_path / "o.csv")])
    assert code == 2


def test_bench_smoke_and_determinism(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["bench", "er-known-support", "--trials", "5", "--seed", "7", "--k", "4,9",
                 "--out", str(a)]) == 0
    header, rows = read_rows(a)
    assert header[0] == "experiment" and len(rows) == 5 * 2 * 3
    for path, workers in ((a, "1"), (b, "2")):
        assert main(["bench", "er-small-hist", "--trials", "4", "--seed", "7", "--no-timing",
                     "--workers", workers, "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_bench_config_file_flags_win(tmp_path):
    ini = tmp_path / "c.ini"
    ini.write_text("[bench]\ntrials = 2\nk_values = 3\nmaster_seed = 5\n")
    out = tmp_path / "o.csv"
    assert main(["bench", "er-known-support", "--config", str(ini), "--trials", "1",
                 "--out", str(out)]) == 0
    _, rows = read_rows(out)
    assert {r[1] for r in rows} == {"0"} and {r[3] for r in rows} == {"3"}


def test_roadnet_needs_graph(tmp_path):
    assert main(["bench", "roadnet", "--out", str(tmp_path / "r.csv")]) == 1


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "gsp_sampling", "--help"], capture_output=True,
                         text=True)
    assert res.returncode == 0 and "bench" in res.stdout

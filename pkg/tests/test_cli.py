import csv
import io

import numpy as np
import pytest

from metric_grf.cli import main
from metric_grf.graph import load_graph


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_gen_graph(tmp_path):
    out = tmp_path / "ba.txt"
    assert main(["gen-graph", "--model", "barabasi-albert", "--n", "30", "--m", "2",
                 "--edge-length", "0.5", "--seed", "4", "--out", str(out)]) == 0
    g = load_graph(out)
    assert (g.num_vertices, g.num_edges) == (30, 57)
    assert np.all(g.lengths == 0.5)


def test_sample_to_stdout(capsys):
    assert main(["sample", "--beta", "1/2", "--ell", "3", "--seed", "1"]) == 0
    r = rows(capsys.readouterr().out)
    assert len(r) == 4 + 4 * 7
    assert list(r[0]) == ["edge_id", "vertex_id", "x", "value"]


def test_sample_file_and_graph(tmp_path):
    g = tmp_path / "g.txt"
    g.write_text("3 2\n0 1 0.5\n1 2 1.5\n")
    out = tmp_path / "f.csv"
    assert main(["sample", "--graph", str(g), "--h", "0.25", "--beta", "0.7", "--kappa", "2",
                 "--mode", "consistent", "--quad-step", "0.4", "--threads", "2", "--out", str(out)]) == 0
    assert len(rows(out.read_text())) == 3 + 1 + 5


def test_sample_rejects_beta_list():
    with pytest.raises(SystemExit):
        main(["sample", "--beta", "0.5,0.6", "--ell", "2"])


def test_sample_needs_mesh_size():
    with pytest.raises(SystemExit):
        main(["sample", "--beta", "0.5"])


def test_strong_error(tmp_path, capsys):
    out = tmp_path / "strong.csv"
    assert main(["strong-error", "--beta", "3/8,3/4", "--ell-ok", "5", "--ell-coarse", "2,3",
                 "--reps", "2", "--out", str(out)]) == 0
    r = rows(out.read_text())
    assert [x["level"] for x in r] == ["2", "3", "fit", "2", "3", "fit"]
    assert "theory=0.250" in capsys.readouterr().err


def test_cov_error(capsys):
    assert main(["cov-error", "--beta", "0.5", "--ell-ok", "4", "--ell-coarse", "2,3"]) == 0
    r = rows(capsys.readouterr().out)
    assert float(r[-1]["theory"]) == 1.5


def test_perf(capsys):
    assert main(["perf", "--sizes", "20,40", "--ell", "3", "--modes", "lumped,consistent",
                 "--tasks", "noise_only", "--repeats", "1"]) == 0
    cap = capsys.readouterr()
    r = rows(cap.out)
    assert [(x["graph_vertices"], x["mode"]) for x in r] == [
        ("20", "lumped"), ("20", "consistent"), ("40", "lumped"), ("40", "consistent")]
    assert int(r[0]["num_nodes"]) == 20 + 37 * 7
    assert "N=" in cap.err


def test_unknown_mode():
    with pytest.raises(SystemExit):
        main(["sample", "--beta", "0.5", "--ell", "2", "--mode", "banded"])

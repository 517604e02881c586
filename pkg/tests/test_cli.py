import json
import subprocess
import sys

import numpy as np
import pytest

from ganc.cli import EXIT_INFEASIBLE, EXIT_INPUT, main
from ganc.model_select import CurvatureProfile, select_k
from ganc.testkit import karate_club


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def chain_file(tmp_path):
    p = tmp_path / "chain.txt"
    p.write_text("a b\nb c\nc d\n")
    return p


def test_gen_ring_small(tmp_path, capsys):
    code, out, _ = run(["gen", "ring", "--cliques", 3, "--size", 2], capsys)
    assert code == 0
    assert len(out.splitlines()) == 6


def test_gen_planted_is_byte_identical(tmp_path, capsys):
    paths = []
    for name in ("a", "b"):
        g, t = tmp_path / f"{name}.txt", tmp_path / f"{name}.tsv"
        assert run(["gen", "planted", "--n", 300, "--seed", 7, "-o", g, "--truth-out", t],
                   capsys)[0] == 0
        paths.append((g.read_bytes(), t.read_bytes()))
    assert paths[0] == paths[1]


def test_oracle_on_chain(chain_file, capsys):
    code, out, _ = run(["oracle", chain_file, "--k", 2], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[:4] == ["a\t0", "b\t0", "c\t1", "d\t1"]
    assert lines[4] == "# nassoc 1.33333333333"


def test_oracle_limits(tmp_path, chain_file, capsys):
    assert run(["oracle", chain_file, "--k", 5], capsys)[0] == EXIT_INFEASIBLE
    big = tmp_path / "big.txt"
    big.write_text("".join(f"{i} {i + 1}\n" for i in range(13)))
    assert run(["oracle", big, "--k", 2], capsys)[0] == EXIT_INFEASIBLE


def test_metrics_on_two_chains(tmp_path, capsys):
    g = tmp_path / "chains.txt"
    t = tmp_path / "truth.tsv"
    assert run(["gen", "chains", "-o", g, "--truth-out", t], capsys)[0] == 0
    pairs = tmp_path / "pairs.tsv"
    pairs.write_text("".join(f"{i}\t{i // 2}\n" for i in range(8)))
    code, out, _ = run(["metrics", g, pairs, "--truth", t], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["nassoc"] == pytest.approx(8 / 3, abs=1e-11)
    assert data["k"] == 4
    code, out, _ = run(["metrics", g, t, "--truth", t], capsys)
    data = json.loads(out)
    assert data["jaccard_vs_truth"] == 1.0
    assert data["nassoc"] == 2.0


def test_single_cluster_metrics(chain_file, tmp_path, capsys):
    one = tmp_path / "one.tsv"
    one.write_text("a\t0\nb\t0\nc\t0\nd\t0\n")
    data = json.loads(run(["metrics", chain_file, one], capsys)[1])
    assert data["modularity"] == 0.0
    assert data["nassoc"] == 1.0 and data["ncut"] == 0.0


def test_cluster_k1(chain_file, tmp_path, capsys):
    part = tmp_path / "p.tsv"
    code, out, _ = run(["cluster", chain_file, "--k", 1, "-o", part], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["k"] == 1 and data["nassoc"] == 1.0 and data["refined"] is False
    assert set(line.split("\t")[1] for line in part.read_text().splitlines()) == {"0"}


def test_cluster_karate(capsys, tmp_path):
    gpath, tpath = tmp_path / "karate.txt", tmp_path / "truth.tsv"
    assert run(["gen", "karate", "-o", gpath, "--truth-out", tpath], capsys)[0] == 0
    g, ids, truth = karate_club()
    assert len(gpath.read_text().splitlines()) == g.edge_count
    code, out, _ = run(["cluster", gpath, "--k", 2, "--truth", tpath], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["nassoc_per_cluster"] == pytest.approx(0.872, abs=0.005)
    assert data["jaccard_vs_truth"] >= 0.85
    code, out, _ = run(["cluster", gpath], capsys)
    assert json.loads(out)["k"] == 3


def test_cluster_ring_auto(tmp_path, capsys):
    g, t = tmp_path / "ring.txt", tmp_path / "ring.tsv"
    run(["gen", "ring", "-o", g, "--truth-out", t], capsys)
    curv = tmp_path / "curv.csv"
    code, out, _ = run(["cluster", g, "--truth", t, "--curvature-out", curv], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["k"] == 24 and data["jaccard_vs_truth"] == 1.0 and data["mode"] == "auto"
    # the chosen level is the argmax of the curvature file we wrote
    rows = np.loadtxt(curv, delimiter=",", skiprows=1)
    prof = CurvatureProfile(ks=rows[:, 0].astype(int), curv=rows[:, 2], nassoc=rows[:, 1])
    assert select_k(prof) == data["k"]
    code, out, _ = run(["cluster", g, "--k-range", "10:15"], capsys)
    assert json.loads(out)["k"] == 12
    code, out, _ = run(["cluster", g, "--refined-curvature", "20:28"], capsys)
    assert json.loads(out)["k"] == 24


def test_disconnected_input_names_the_flag(tmp_path, capsys):
    g = tmp_path / "two.txt"
    g.write_text("a b\nb c\nx y\n")
    code, _, err = run(["cluster", g], capsys)
    assert code == EXIT_INPUT
    assert "--largest-component" in err
    code, out, _ = run(["cluster", g, "--largest-component", "--k", 1], capsys)
    assert code == 0
    assert json.loads(out)["n"] == 3


def test_bad_requests(chain_file, tmp_path, capsys):
    assert run(["cluster", chain_file, "--k", 9], capsys)[0] == EXIT_INFEASIBLE
    assert run(["cluster", chain_file, "--k-range", "2:7"], capsys)[0] == EXIT_INFEASIBLE
    bad = tmp_path / "bad.txt"
    bad.write_text("a b\nb c -2\n")
    code, _, err = run(["cluster", bad], capsys)
    assert code == EXIT_INPUT and "line 2" in err
    assert run(["cluster", tmp_path / "missing.txt"], capsys)[0] == EXIT_INPUT
    out = tmp_path / "x.tsv"
    code = run(["cluster", chain_file, "-o", out, "--metrics-out", out], capsys)[0]
    assert code == EXIT_INPUT


def test_artifacts_are_deterministic(tmp_path, capsys):
    g = tmp_path / "g.txt"
    run(["gen", "planted", "--n", 400, "--seed", 3, "-o", g], capsys)
    blobs = []
    for rep in range(2):
        d = tmp_path / f"run{rep}"
        d.mkdir()
        names = ["p.tsv", "d.txt", "c.csv", "m.json"]
        code = run(["cluster", g, "-o", d / names[0], "--dendrogram-out", d / names[1],
                    "--curvature-out", d / names[2], "--metrics-out", d / names[3]], capsys)[0]
        assert code == 0
        blobs.append([(d / n).read_bytes() for n in names])
    assert blobs[0] == blobs[1]


def test_module_entry_point(chain_file):
    res = subprocess.run([sys.executable, "-m", "ganc", "cluster", str(chain_file), "--k", "2"],
                         capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["nassoc"] == pytest.approx(4 / 3, abs=1e-11)

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from starsketch.cli import main
from starsketch.io import load_sketch, save_outline_csv

TWO_PI = 2 * math.pi


def polar_csv(path, radii, angle=0.0):
    n = len(radii)
    th = TWO_PI * np.arange(n) / n + angle
    save_outline_csv(np.column_stack([radii * np.cos(th), radii * np.sin(th)]), path)
    return str(path)


@pytest.fixture
def shapes(tmp_path):
    th = TWO_PI * np.arange(360) / 360
    out = {"circle": polar_csv(tmp_path / "circle.csv", np.ones(64))}
    for i in range(3):
        out[f"blob{i}"] = polar_csv(tmp_path / f"blob{i}.csv", 0.7 + 0.2 * np.cos((i + 2) * th))
    return out


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_sketch_circle_all_ones(capsys, shapes):
    code, out, _ = run(capsys, "sketch", shapes["circle"], "--m", 16)
    assert code == 0
    rec = json.loads(out)
    assert rec["m"] == 16 and rec["phi"] == {"kind": "neg_exp", "lambda": 1.0}
    np.testing.assert_allclose(rec["values"], 1.0, atol=1e-12)


def test_sketch_batch_outputs(capsys, shapes, tmp_path):
    files = [shapes[f"blob{i}"] for i in range(3)]
    code, _, _ = run(capsys, "sketch", *files, "--m", 32, "-o", tmp_path / "out")
    assert code == 0
    assert sorted(p.name for p in (tmp_path / "out").iterdir()) == ["blob0.sketch", "blob1.sketch", "blob2.sketch"]
    code, _, _ = run(capsys, "sketch", *files, "--m", 32, "--format", "json", "-o", tmp_path / "js")
    assert sorted(p.name for p in (tmp_path / "js").iterdir()) == ["blob0.json", "blob1.json", "blob2.json"]


def test_sketch_rotated_shape(capsys, tmp_path):
    th = TWO_PI * np.arange(720) / 720
    r = lambda t: 0.7 + 0.15 * np.cos(3 * t) + 0.05 * np.sin(5 * t)
    base = polar_csv(tmp_path / "base.csv", r(th))
    # same profile, sampled on a rotated grid
    cont = tmp_path / "cont.csv"
    save_outline_csv(np.column_stack([r(th) * np.cos(th + 0.377), r(th) * np.sin(th + 0.377)]), cont)
    snap = tmp_path / "snap.csv"
    a = TWO_PI * 5 / 128
    save_outline_csv(np.column_stack([r(th) * np.cos(th + a), r(th) * np.sin(th + a)]), snap)
    run(capsys, "sketch", base, cont, snap, "--m", 128, "-o", tmp_path / "sk")
    v = {n: load_sketch(tmp_path / "sk" / f"{n}.sketch").values for n in ("base", "cont", "snap")}
    assert np.max(np.abs(v["cont"] - v["base"])) < 1e-2
    assert np.max(np.abs(v["snap"] - v["base"])) < 1e-9


def test_sketch_skips_bad_inputs(capsys, shapes, tmp_path):
    bad = tmp_path / "junk.csv"
    bad.write_text("0,0\nx,1\n")
    th = np.linspace(0.2, TWO_PI - 0.2, 100)
    ring = np.column_stack([np.cos(th), np.sin(th)])
    save_outline_csv(np.vstack([ring, 0.9 * ring[::-1]]), tmp_path / "crescent.csv")
    code, _, err = run(capsys, "sketch", shapes["circle"], bad, "--m", 8, "-o", tmp_path / "o")
    assert code == 1 and "junk.csv:2" in err
    code, _, err = run(capsys, "sketch", shapes["circle"], tmp_path / "crescent.csv", "--m", 8, "-o", tmp_path / "o2")
    assert code == 2 and "crescent.csv" in err and "not inside" in err
    assert (tmp_path / "o2" / "circle.sketch").exists()


def test_standardize_and_discretize(capsys, tmp_path):
    sq = tmp_path / "sq.csv"
    save_outline_csv([(0, 0), (2, 0), (2, 2), (0, 2)], sq)
    code, out, _ = run(capsys, "standardize", sq)
    rec = json.loads(out)
    assert code == 0 and rec["centroid"] == [1.0, 1.0] and rec["scale"] == pytest.approx(math.sqrt(2))
    (tmp_path / "std.json").write_text(out)
    code, out, _ = run(capsys, "discretize", tmp_path / "std.json", "--m", 4, "--rays-per-wedge", 0)
    rec = json.loads(out)
    assert rec["m"] == 4
    np.testing.assert_allclose(rec["values"], 1.0, atol=1e-12)


def test_dist(capsys, shapes, tmp_path):
    code, out, _ = run(capsys, "dist", shapes["blob0"], shapes["blob0"], "--m", 32)
    rec = json.loads(out)
    assert code == 0 and rec["sketch_distance"] == 0.0 and rec["star_distance"] == 0.0
    run(capsys, "sketch", shapes["blob0"], shapes["blob1"], "--m", 32, "-o", tmp_path / "sk")
    code, out, _ = run(capsys, "dist", tmp_path / "sk" / "blob0.sketch", tmp_path / "sk" / "blob1.sketch")
    assert json.loads(out)["sketch_distance"] > 0
    run(capsys, "sketch", shapes["blob0"], "--m", 16, "-o", tmp_path / "sk16")
    code, _, err = run(capsys, "dist", tmp_path / "sk" / "blob0.sketch", tmp_path / "sk16" / "blob0.sketch")
    assert code == 1 and "m=32" in err and "m=16" in err


def test_index_build_query_cluster(capsys, shapes, tmp_path):
    files = [shapes[f"blob{i}"] for i in range(3)] + [shapes["circle"]]
    code, _, _ = run(capsys, "index", "build", *files, "--m", 64, "-o", tmp_path / "idx")
    assert code == 0
    code, out, _ = run(capsys, "index", "query", tmp_path / "idx", shapes["blob1"], "-k", 2)
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "rank,id,distance" and lines[1] == "1,blob1,0.0"
    code, out, _ = run(capsys, "index", "query", tmp_path / "idx", shapes["blob1"], "-k", 4, "--format", "json")
    ranked = json.loads(out)
    assert [r["rank"] for r in ranked] == [1, 2, 3, 4]
    code, _, err = run(capsys, "index", "query", tmp_path / "idx", shapes["blob1"], "--m", 32)
    assert code == 1 and "m=32" in err and "m=64" in err
    code, out, _ = run(capsys, "cluster", tmp_path / "idx", "-k", 2, "--seed", 1)
    rec = json.loads(out)
    assert code == 0 and set(rec["assignments"]) == {"blob0", "blob1", "blob2", "circle"}


def test_experiment_cluster_tables(capsys, tmp_path):
    args = ["experiment", "cluster", "--m", "16,32", "--trials", 2, "--n-originals", 3, "--n-copies", 2, "--seed", 5]
    code, out1, err = run(capsys, *args)
    assert code == 0 and out1.splitlines()[0] == "m,trial,accuracy" and len(out1.splitlines()) == 5
    assert err.splitlines()[0] == "m,mean,std"
    _, out2, _ = run(capsys, *args, "--workers", 2)
    assert out1 == out2
    code, _, _ = run(capsys, *args, "--snap-rotations", "-o", tmp_path / "t.csv", "--summary", tmp_path / "s.csv")
    rows = (tmp_path / "t.csv").read_text().splitlines()[1:]
    assert all(r.endswith(",1.0") for r in rows)
    assert (tmp_path / "s.csv").read_text().splitlines()[0] == "m,mean,std"


def test_experiment_config_file_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('seed = 3\nm_values = [16]\ntrials = 1\nn_originals = 3\nn_copies = 2\n[phi]\nkind = "neg_exp"\nlambda = 2.0\n')
    code, out, _ = run(capsys, "experiment", "cluster", "--config", cfg)
    assert code == 0 and len(out.splitlines()) == 2
    code, out, _ = run(capsys, "experiment", "cluster", "--config", cfg, "--trials", 3, "--m", 32)
    assert [line.split(",")[:2] for line in out.splitlines()[1:]] == [["32", "0"], ["32", "1"], ["32", "2"]]
    js = tmp_path / "c.json"
    js.write_text(json.dumps({"m_values": [16], "trials": 1, "n_originals": 2, "n_copies": 1}))
    assert run(capsys, "experiment", "cluster", "--config", js)[0] == 0
    js.write_text(json.dumps({"bogus": 1}))
    code, _, err = run(capsys, "experiment", "cluster", "--config", js)
    assert code == 1 and "bogus" in err


def test_experiment_knn_and_convergence(capsys):
    code, out, err = run(capsys, "experiment", "knn", "--m", 64, "--n-shapes", 8, "--trials", 1, "-k", 3)
    assert code == 0 and out.splitlines()[0] == "m,trial,query,rank,top_id,top_distance"
    assert len(out.splitlines()) == 9 and "rank1_fraction" in err
    code, out, err = run(capsys, "experiment", "convergence", "--m", "32,64,128,256")
    assert code == 0 and out.splitlines()[0] == "m,deviation" and err.startswith("order,floor")
    assert float(err.splitlines()[1].split(",")[0]) >= 1.8
    code, _, err = run(capsys, "experiment", "convergence", "--m", "32,64")
    assert code == 1 and "3 m values" in err


def test_experiment_rejects_zero_copies(capsys):
    code, _, err = run(capsys, "experiment", "cluster", "--m", 16, "--n-copies", 0)
    assert code == 1 and "n_copies" in err


def test_verify_injectivity(capsys):
    code, out, _ = run(capsys, "verify", "injectivity", "--m", 4)
    rec = json.loads(out)
    assert code == 0 and rec["ok"] and rec["pairs"] == 576
    code, out, _ = run(capsys, "verify", "injectivity", "--m", "6,8", "--family", "random_general_position", "--trials", 200)
    assert code == 0 and [r["m"] for r in json.loads(out)] == [6, 8]
    code, _, err = run(capsys, "verify", "injectivity", "--m", 9)
    assert code == 1


def test_numerical_rejection_exit_code(capsys, tmp_path):
    f = tmp_path / "f.json"
    f.write_text(json.dumps({"m": 2, "values": [0.001, 1.0]}))
    code, _, err = run(capsys, "sketch", f, "--lambda", 1000)
    assert code == 2 and "overflow" in err


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "starsketch.cli", "verify", "injectivity", "--m", "3"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["ok"]
    proc = subprocess.run([sys.executable, "-m", "starsketch.cli", "sketch", str(tmp_path / "nope.csv")], capture_output=True, text=True)
    assert proc.returncode == 1 and "nope.csv" in proc.stderr

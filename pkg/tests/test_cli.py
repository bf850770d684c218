"""End-to-end command-line runs, exit codes, and output determinism."""

import json

import numpy as np
import pytest

from eikdepth import density as dens
from eikdepth import graphs as gr
from eikdepth.cli import main
from eikdepth.density import CylinderSurface, UniformBox


@pytest.fixture()
def square_cfg(tmp_path):
    path = tmp_path / "uniform_square.json"
    dens.save_density(UniformBox(np.zeros(2), np.ones(2)), path)
    return str(path)


def read_csv(path):
    return path.read_text().strip().splitlines()


# -------------------------------- grid-solve ---------------------------------

def test_grid_solve_outputs(tmp_path, square_cfg):
    out = tmp_path / "out"
    rc = main(["grid-solve", "--density", square_cfg, "--alpha", "1",
               "--n", "129", "--contours", "0.1,0.25,0.4",
               "--out-dir", str(out), "--quiet"])
    assert rc == 0
    assert (out / "depth_field.json").exists()
    assert (out / "depth_field.f64").exists()
    rows = read_csv(out / "contours.csv")
    assert rows[0] == "level,polyline_id,x,y"
    levels = {row.split(",")[0] for row in rows[1:]}
    assert levels == {"0.1", "0.25", "0.4"}


def test_grid_solve_deterministic(tmp_path, square_cfg):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        rc = main(["grid-solve", "--density", square_cfg, "--n", "65",
                   "--contours", "0.25", "--out-dir", str(out), "--quiet"])
        assert rc == 0
        outs.append(out)
    a, b = outs
    assert (a / "depth_field.f64").read_bytes() == (b / "depth_field.f64").read_bytes()
    assert (a / "contours.csv").read_bytes() == (b / "contours.csv").read_bytes()


def test_grid_solve_missing_file(tmp_path):
    rc = main(["grid-solve", "--density", str(tmp_path / "nope.json"),
               "--out-dir", str(tmp_path / "o"), "--quiet"])
    assert rc == 2


def test_grid_solve_alpha_zero(tmp_path, square_cfg):
    rc = main(["grid-solve", "--density", square_cfg, "--alpha", "0",
               "--out-dir", str(tmp_path / "o"), "--quiet"])
    assert rc == 2


def test_no_partial_outputs_on_failure(tmp_path, square_cfg):
    out = tmp_path / "o"
    rc = main(["grid-solve", "--density", square_cfg, "--alpha", "-1",
               "--out-dir", str(out), "--quiet"])
    assert rc == 2
    assert not out.exists() or list(out.iterdir()) == []


# ---------------------------------- sample -----------------------------------

def test_sample_deterministic(tmp_path, square_cfg):
    for name, seed in (("a", "5"), ("b", "5"), ("c", "6")):
        rc = main(["sample", "--density", square_cfg, "--n", "200",
                   "--seed", seed, "--out-dir", str(tmp_path / name), "--quiet"])
        assert rc == 0
    a = (tmp_path / "a" / "points.csv").read_bytes()
    b = (tmp_path / "b" / "points.csv").read_bytes()
    c = (tmp_path / "c" / "points.csv").read_bytes()
    assert a == b
    assert a != c


# -------------------------------- graph-solve --------------------------------

def test_graph_solve_cylinder_band(tmp_path):
    cyl_cfg = tmp_path / "cylinder.json"
    dens.save_density(CylinderSurface(), cyl_cfg)
    rc = main(["sample", "--density", str(cyl_cfg), "--n", "4225",
               "--seed", "0", "--out-dir", str(tmp_path), "--quiet"])
    assert rc == 0
    out = tmp_path / "solve"
    rc = main(["graph-solve", "--points", str(tmp_path / "points.csv"),
               "--graph", "kernel", "--h", "0.3", "--solver", "path",
               "--boundary-band", "0.1", "--boundary-axis", "2",
               "--out-dir", str(out), "--quiet"])
    assert rc == 0
    pts, _ = gr.load_points(tmp_path / "points.csv")
    z = pts[:, 2]
    band = (z - z.min() <= 0.1) | (z.max() - z <= 0.1)
    rows = read_csv(out / "depth.csv")[1:]
    depth = np.array([float(r.split(",")[1]) for r in rows])
    assert np.array_equal(depth == 0.0, band)  # zero exactly on band nodes
    summary = json.loads((out / "summary.json").read_text())
    assert summary["n_boundary"] == int(band.sum())


def test_graph_solve_union_cloud(tmp_path):
    # sphere plus a line through its poles; escape only at the line ends
    rng = np.random.default_rng(0)
    z = rng.normal(size=(2000, 3))
    sphere = z / np.linalg.norm(z, axis=1, keepdims=True)
    line = np.column_stack([np.zeros(121), np.zeros(121),
                            np.linspace(-1.5, 1.5, 121)])
    pts = np.vstack([sphere, line])
    gr.save_points(tmp_path / "u.csv", pts)
    out = tmp_path / "out"
    rc = main(["graph-solve", "--points", str(tmp_path / "u.csv"),
               "--graph", "kernel", "--h", "0.25", "--solver", "scheme",
               "--boundary-band", "0.05", "--boundary-axis", "2",
               "--out-dir", str(out), "--quiet"])
    assert rc == 0
    summary = json.loads((out / "summary.json").read_text())
    # both manifolds drain through the junctions: every node is reached
    assert summary["n_reached"] == summary["n_nodes"]
    assert summary["max_depth"] > 0


def test_graph_solve_empty_boundary(tmp_path, square_cfg):
    main(["sample", "--density", square_cfg, "--n", "100",
          "--out-dir", str(tmp_path), "--quiet"])
    rc = main(["graph-solve", "--points", str(tmp_path / "points.csv"),
               "--h", "0.3", "--boundary-band", "0.05",
               "--boundary-box=-9,-9,-8,-8",
               "--out-dir", str(tmp_path / "o"), "--quiet"])
    assert rc == 3


def test_graph_solve_boundary_file(tmp_path, square_cfg):
    main(["sample", "--density", square_cfg, "--n", "120",
          "--out-dir", str(tmp_path), "--quiet"])
    (tmp_path / "bnd.txt").write_text("0\n3\n17\n")
    out = tmp_path / "o"
    rc = main(["graph-solve", "--points", str(tmp_path / "points.csv"),
               "--h", "0.3", "--boundary-file", str(tmp_path / "bnd.txt"),
               "--out-dir", str(out), "--quiet"])
    assert rc == 0
    rows = read_csv(out / "depth.csv")[1:]
    depth = np.array([float(r.split(",")[1]) for r in rows])
    assert set(np.flatnonzero(depth == 0.0).tolist()) == {0, 3, 17}


def test_graph_solve_boundary_index_range(tmp_path, square_cfg):
    main(["sample", "--density", square_cfg, "--n", "50",
          "--out-dir", str(tmp_path), "--quiet"])
    (tmp_path / "bnd.txt").write_text("999\n")
    rc = main(["graph-solve", "--points", str(tmp_path / "points.csv"),
               "--h", "0.3", "--boundary-file", str(tmp_path / "bnd.txt"),
               "--out-dir", str(tmp_path / "o"), "--quiet"])
    assert rc == 2


# ------------------------------- labeled-depth -------------------------------

def blob_file(tmp_path, seeds=(0,), sep=2.5, sigma=0.5, n=200):
    rng = np.random.default_rng(seeds[0])
    a = rng.normal(scale=sigma, size=(n, 2))
    b = rng.normal(scale=sigma, size=(n, 2)) + np.array([sep, 0.0])
    pts = np.vstack([a, b])
    labels = np.array(["A"] * n + ["B"] * n)
    path = tmp_path / "blobs.csv"
    gr.save_points(path, pts, labels)
    return path


def test_labeled_depth(tmp_path):
    path = blob_file(tmp_path)
    out = tmp_path / "out"
    rc = main(["labeled-depth", "--points", str(path), "--target", "A",
               "--out-dir", str(out), "--quiet"])
    assert rc == 0
    rows = read_csv(out / "target_depth.csv")
    assert rows[0] == "i,depth,reached"
    vals = [float(r.split(",")[1]) for r in rows[1:]
            if r.split(",")[1] != "inf"]
    assert vals == sorted(vals, reverse=True)
    assert len(rows) - 1 == 200


def test_labeled_depth_absent_target(tmp_path):
    path = blob_file(tmp_path)
    rc = main(["labeled-depth", "--points", str(path), "--target", "Z",
               "--out-dir", str(tmp_path / "o"), "--quiet"])
    assert rc == 2


def test_labeled_depth_single_label(tmp_path):
    pts = np.random.default_rng(0).normal(size=(40, 2))
    gr.save_points(tmp_path / "one.csv", pts, np.array(["A"] * 40))
    rc = main(["labeled-depth", "--points", str(tmp_path / "one.csv"),
               "--target", "A", "--out-dir", str(tmp_path / "o"), "--quiet"])
    assert rc == 2


# ---------------------------------- whiten -----------------------------------

def test_whiten_cmd(tmp_path):
    rng = np.random.default_rng(2)
    pts = rng.normal(size=(500, 2)) @ np.array([[2.0, 0.3], [0.0, 0.7]])
    gr.save_points(tmp_path / "p.csv", pts)
    out = tmp_path / "o"
    rc = main(["whiten", "--points", str(tmp_path / "p.csv"),
               "--out-dir", str(out), "--quiet"])
    assert rc == 0
    white, _ = gr.load_points(out / "whitened.csv")
    assert np.abs(np.cov(white.T) - np.eye(2)).max() <= 1e-6
    tr = json.loads((out / "transform.json").read_text())
    assert set(tr) == {"location", "scatter"}


# ---------------------------------- report -----------------------------------

def test_report_pass(tmp_path):
    rc = main(["report", "--check", "modes", "--sep", "4", "--n", "129",
               "--out-dir", str(tmp_path), "--quiet"])
    assert rc == 0
    lines = read_csv(tmp_path / "report.jsonl")
    assert all(json.loads(ln)["pass"] for ln in lines)


def test_report_comparison(tmp_path):
    rc = main(["report", "--check", "comparison", "--pairs", "5", "--n", "33",
               "--out-dir", str(tmp_path), "--quiet"])
    assert rc == 0


def test_report_failing_check_exits_1(tmp_path):
    # between 2 and 4 sigma the simple count prediction is out of its
    # envelope: the field is already bimodal, the flag still says one mode
    rc = main(["report", "--check", "modes", "--sep", "3", "--n", "129",
               "--out-dir", str(tmp_path), "--quiet"])
    assert rc == 1
    lines = read_csv(tmp_path / "report.jsonl")
    assert any(not json.loads(ln)["pass"] for ln in lines)


def test_report_unknown_check():
    with pytest.raises(SystemExit) as exc:
        main(["report", "--check", "bogus"])
    assert exc.value.code == 2

"""Affine transform, Tukey reference, warps, and all verification harnesses."""

import json
import math

import numpy as np
import pytest

from eikdepth import analysis as an
from eikdepth import gridsolve as gs
from eikdepth.density import (
    GaussianMixture,
    GridDensity,
    PhiSpec,
    UniformBox,
    sample,
)
from eikdepth.errors import ConfigError
from eikdepth.graphs import KernelSpec


# ------------------------------ scatter / whiten -----------------------------

def spread_points(cov, n=6, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, 2))
    x -= x.mean(axis=0)
    # force the sample covariance to the requested matrix exactly
    c = np.cov(x.T, bias=False)
    w, v = np.linalg.eigh(c)
    white = (x @ v) / np.sqrt(w)
    cw, cv = np.linalg.eigh(np.asarray(cov, dtype=float))
    return white @ (cv * np.sqrt(cw)).T


def test_fit_scatter_identity():
    pts = spread_points(np.eye(2))
    t = an.fit_scatter(pts)
    assert np.abs(t.inverse_sqrt - np.eye(2)).max() <= 1e-9


def test_fit_scatter_diagonal():
    pts = spread_points(np.diag([4.0, 1.0]))
    t = an.fit_scatter(pts)
    assert np.abs(t.inverse_sqrt - np.diag([0.5, 1.0])).max() <= 1e-9
    assert np.abs(t.inverse_sqrt @ t.scatter @ t.inverse_sqrt
                  - np.eye(2)).max() <= 1e-9


def test_fit_scatter_correlated_sample():
    cov = np.array([[1.0, 0.8], [0.8, 1.0]])
    mix = GaussianMixture(np.array([1.0]), np.zeros((1, 2)), np.array([cov]))
    pts = sample(mix, 10_000, seed=9)
    t = an.fit_scatter(pts)
    white = an.whiten(t, pts)
    assert np.abs(np.cov(white.T) - np.eye(2)).max() <= 0.05


def test_fit_scatter_singular():
    line = np.column_stack([np.arange(5.0), 2 * np.arange(5.0)])
    with pytest.raises(ConfigError):
        an.fit_scatter(line)
    with pytest.raises(ConfigError):
        an.fit_scatter(np.zeros((2, 2)))  # n must exceed d


def test_whiten_examples():
    pts = spread_points(np.diag([4.0, 1.0]), seed=3)
    t = an.fit_scatter(pts)
    assert np.abs(an.whiten(t, t.location[None, :])).max() <= 1e-12
    back = an.unwhiten(t, an.whiten(t, pts))
    assert np.abs(back - pts).max() <= 1e-12


def test_whiten_affine_equivariance():
    rng = np.random.default_rng(12)
    pts = rng.normal(size=(500, 2))
    a = np.array([[1.5, 0.4], [-0.2, 0.8]])
    b = np.array([3.0, -1.0])
    w1 = an.whiten(an.fit_scatter(pts), pts)
    mapped = pts @ a.T + b
    w2 = an.whiten(an.fit_scatter(mapped), mapped)
    assert np.abs(np.cov(w1.T) - np.cov(w2.T)).max() <= 1e-9


# --------------------------------- Tukey depth -------------------------------

def test_tukey_diamond():
    pts = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    assert an.tukey_depth_2d(pts, np.zeros(2), m=360) == pytest.approx(0.5)


def test_tukey_outside_hull():
    rng = np.random.default_rng(1)
    pts = rng.uniform(-1.0, 1.0, size=(200, 2))
    assert an.tukey_depth_2d(pts, np.array([5.0, 0.0])) == 0.0


def test_tukey_upper_bound():
    rng = np.random.default_rng(2)
    pts = rng.normal(size=(401, 2))
    n = 401
    for q in (np.zeros(2), pts.mean(axis=0), pts[17]):
        assert an.tukey_depth_2d(pts, q) <= 0.5 + 1.0 / n


def test_tukey_errors():
    pts = np.zeros((3, 2))
    with pytest.raises(ConfigError):
        an.tukey_depth_2d(pts, np.zeros(2), m=8)
    with pytest.raises(ConfigError):
        an.tukey_depth_2d(np.zeros((0, 2)), np.zeros(2))


# ----------------------------------- warps -----------------------------------

def test_warp_identity():
    w = an.WarpMap.identity(2)
    pts = np.random.default_rng(0).normal(size=(10, 2))
    assert np.array_equal(w.apply(pts), pts)
    assert w.epsilon == 0.0


def test_warp_bump_epsilon_declared():
    w = an.WarpMap.bump(center=(0.5, 0.5), radius=0.2, epsilon=0.1,
                        direction=(1.0, 0.0))
    est = w.estimated_epsilon((0.0, 0.0), (1.0, 1.0))
    assert est <= w.epsilon + 1e-6
    assert est >= 0.5 * w.epsilon  # the bound is tight up to probe spacing


def test_warp_inverse_roundtrip():
    w = an.WarpMap.bump(center=(0.0, 0.0), radius=0.5, epsilon=0.2,
                        direction=(0.6, 0.8))
    rng = np.random.default_rng(4)
    pts = rng.uniform(-1.0, 1.0, size=(300, 2))
    back = w.inverse(w.apply(pts))
    assert np.abs(back - pts).max() <= 1e-9


def test_warp_det_matches_numeric():
    w = an.WarpMap.bump(center=(0.2, -0.1), radius=0.4, epsilon=0.15,
                        direction=(0.0, 1.0))
    pts = np.array([[0.3, 0.0], [0.2, 0.1], [0.0, 0.0], [5.0, 5.0]])
    det = w.det_jacobian(pts)
    eps = 1e-6
    for row, want in zip(pts, det):
        j = np.empty((2, 2))
        for a in range(2):
            e = np.zeros(2)
            e[a] = eps
            j[:, a] = (w.apply((row + e)[None, :])[0]
                       - w.apply((row - e)[None, :])[0]) / (2 * eps)
        assert np.linalg.det(j) == pytest.approx(want, abs=1e-6)


def test_warp_rotation_is_rigid():
    w = an.WarpMap.rotation(0.7)
    assert w.rigid and w.epsilon == 0.0
    pts = np.random.default_rng(3).normal(size=(50, 2))
    out = w.apply(pts)
    d0 = np.linalg.norm(pts[0] - pts[1])
    assert np.linalg.norm(out[0] - out[1]) == pytest.approx(d0, rel=1e-12)


# ---------------------------- robustness sandwich ----------------------------

def test_sandwich_identity_warp():
    rep = an.isometric_robustness_check(
        UniformBox(np.zeros(2), np.ones(2)), an.WarpMap.identity(2),
        PhiSpec(1.0), n=65)
    assert rep.passed
    assert rep.observed_margin <= 1e-9


def test_sandwich_bump_grid():
    w = an.WarpMap.bump(center=(0.5, 0.5), radius=0.15, epsilon=0.1,
                        direction=(1.0, 0.0))
    rep = an.isometric_robustness_check(
        UniformBox(np.zeros(2), np.ones(2)), w, PhiSpec(1.0), n=129)
    assert rep.passed
    assert rep.tolerance == pytest.approx(3.0 / 128)


def test_sandwich_rotation_cloud():
    rng = np.random.default_rng(8)
    pts = rng.uniform(0.0, 1.0, size=(600, 2))
    h = 0.15
    boundary = ((pts < h).any(axis=1) | (pts > 1 - h).any(axis=1))
    rep = an.isometric_robustness_check(
        pts, an.WarpMap.rotation(0.4), PhiSpec(1.0),
        kernel=KernelSpec("indicator", h, 2), boundary=boundary)
    assert rep.passed
    assert rep.observed_margin <= 1e-9


def test_sandwich_noninvertible_warp():
    # amplitude far above the invertibility threshold: det DPhi crosses zero
    bad = an.WarpMap("bump", 2, epsilon=2.0, rigid=False,
                     center=np.zeros(2), radius=0.2,
                     amplitude=0.5, direction=np.array([1.0, 0.0]))
    with pytest.raises(ConfigError):
        an.isometric_robustness_check(
            UniformBox(np.array([-1.0, -1.0]), np.ones(2)), bad,
            PhiSpec(1.0), n=33)


# -------------------------------- carve channel ------------------------------

def carve_inputs(n=129):
    h = 1.0 / (n - 1)
    vals = np.ones((n, n))
    model = GridDensity(np.zeros(2), h, vals)
    path = np.array([[0.5, 0.5], [0.5, 1.0]])
    return model, path


def test_carve_width_zero():
    model, path = carve_inputs()
    carved, removed = an.carve_channel(model, path, 0.0, 0.0)
    assert removed == 0.0
    assert np.array_equal(carved.values, model.values)


def test_carve_floor_equals_density():
    model, path = carve_inputs()
    carved, removed = an.carve_channel(model, path, 0.05, 1.0)
    assert removed == 0.0
    assert np.array_equal(carved.values, model.values)


def test_carve_center_depth_collapse():
    model, path = carve_inputs()
    carved, removed = an.carve_channel(model, path, 0.01, 0.0)
    assert removed <= 0.01
    phi = PhiSpec(1.0)
    before = gs.solve_depth(model, phi, n=129)
    after = gs.solve_depth(carved, phi, n=129)
    c_before = before.depth_at([0.5, 0.5])
    c_after = after.depth_at([0.5, 0.5])
    assert c_after <= 0.1 * c_before
    # comparison-principle consequence: carving never deepens any node
    assert np.all(after.values <= before.values + 1e-12)


# ------------------------------ stability check ------------------------------

def test_stability_constant_shift():
    n = 65
    h = 1.0 / (n - 1)
    v1 = np.full((n, n), 1.0)
    m1 = GridDensity(np.zeros(2), h, v1)
    m2 = GridDensity(np.zeros(2), h, v1 + 0.1)
    rep = an.stability_check(m1, m2, 0.5, 2.0, n=n)
    assert rep.passed
    assert rep.tolerance == pytest.approx(3 * h)
    lip = 2 * math.sqrt(2.0)
    assert f"{lip:.4g}"[:4] in rep.details or "2.828" in rep.details


def test_stability_equal_densities():
    n = 33
    h = 1.0 / (n - 1)
    m = GridDensity(np.zeros(2), h, np.full((n, n), 1.3))
    rep = an.stability_check(m, m, 0.5, 2.0, n=n)
    assert rep.passed
    assert rep.observed_margin <= 0.0


def test_stability_bounds_enforced():
    n = 33
    h = 1.0 / (n - 1)
    lo = GridDensity(np.zeros(2), h, np.full((n, n), 0.3))
    ok = GridDensity(np.zeros(2), h, np.ones((n, n)))
    with pytest.raises(ConfigError):
        an.stability_check(lo, ok, 0.5, 2.0, n=n)


# --------------------------- mode separation predicate -----------------------

def iso_mixture(dist, sigma=0.25):
    return GaussianMixture(np.array([0.5, 0.5]),
                           np.array([[0.0, 0.0], [dist, 0.0]]),
                           np.array([sigma ** 2 * np.eye(2)] * 2))


def test_predicate_boundary_cases():
    assert an.mode_separation_predicate(iso_mixture(1.01)) is True
    assert an.mode_separation_predicate(iso_mixture(1.0)) is False  # strict
    assert an.mode_separation_predicate(iso_mixture(0.5)) is False


def test_predicate_single_component():
    single = GaussianMixture(np.array([1.0]), np.zeros((1, 2)),
                             np.array([0.25 * np.eye(2)]))
    assert an.mode_separation_predicate(single) is True


def test_predicate_needs_isotropy():
    bad = GaussianMixture(np.array([0.5, 0.5]),
                          np.array([[0.0, 0.0], [3.0, 0.0]]),
                          np.array([np.diag([1.0, 2.0]), np.diag([1.0, 2.0])]))
    with pytest.raises(ConfigError):
        an.mode_separation_predicate(bad)


# ------------------------------- report plumbing -----------------------------

def test_report_invariant_and_json():
    rep = an.make_report("demo", 0.01, 0.02, details="x")
    assert rep.passed and rep.observed_margin == 0.01
    rep2 = an.make_report("demo", 0.03, 0.02)
    assert not rep2.passed
    line = an.report_line(rep)
    obj = json.loads(line)
    assert list(obj)[:4] == ["name", "pass", "observed_margin", "tolerance"]
    assert obj["pass"] is True and obj["name"] == "demo"


def test_write_reports(tmp_path):
    reps = [an.make_report("a", 0.0, 1.0), an.make_report("b", 2.0, 1.0)]
    out = tmp_path / "r.jsonl"
    with open(out, "w") as fh:
        all_ok = an.write_reports(fh, reps)
    assert all_ok is False
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 2
    assert json.loads(lines[1])["pass"] is False


# ------------------------------ bundled harnesses ----------------------------

def test_check_comparison():
    reps = an.check_comparison(n=33, pairs=10, seed=0)
    assert all(r.passed for r in reps)


def test_check_scaling_all_passes():
    for alpha, a in ((1.0, 2.0), (0.5, 2.0), (0.5, 0.5)):
        reps = an.check_scaling(alpha, a, n=65)
        assert all(r.passed for r in reps), (alpha, a)


def test_check_rigid():
    reps = an.check_rigid(n=33, n_points=300, seed=1)
    assert {r.name for r in reps} == {"rigid_grid", "rigid_cloud"}
    assert all(r.passed for r in reps)


def test_check_supersolution_uniform():
    reps = an.check_supersolution("uniform", n=65)
    assert all(r.passed for r in reps)


def test_check_modes_counts():
    reps = an.check_modes(sep_sigmas=4.0, sigma=0.25, n=129)
    assert all(r.passed for r in reps)
    reps1 = an.check_modes(sep_sigmas=2.0, sigma=0.25, n=129)
    assert all(r.passed for r in reps1)

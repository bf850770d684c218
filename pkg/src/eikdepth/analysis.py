"""Verification harnesses around the depth solvers.

Covers the affine invariantization (whitening by the inverse square root
of a scatter matrix), a brute-force halfspace-depth reference in 2-D,
smooth warp maps with certified Jacobian bounds for robustness checks,
density surgery (channel carving), and the named property checks that
the command-line ``report`` command drives.  Every check returns a
``PropertyReport`` whose pass flag is forced to agree with
``observed_margin <= tolerance``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import density as dens
from . import gridsolve
from . import graphs
from .density import DensityModel, GaussianMixture, GridDensity, PhiSpec, UniformBox
from .errors import ConfigError
from .gridsolve import DepthField, GridSpec

__all__ = [
    "ScatterTransform",
    "WarpMap",
    "PropertyReport",
    "fit_scatter",
    "whiten",
    "unwhiten",
    "tukey_depth_2d",
    "isometric_robustness_check",
    "carve_channel",
    "stability_check",
    "mode_separation_predicate",
    "make_report",
    "report_line",
    "write_reports",
    "check_comparison",
    "check_scaling",
    "check_rigid",
    "check_sandwich",
    "check_stability",
    "check_modes",
    "check_supersolution",
]


# ------------------------------- whitening ---------------------------------

@dataclass(frozen=True)
class ScatterTransform:
    """Location and scatter with the symmetric inverse square root."""

    location: np.ndarray
    scatter: np.ndarray
    inverse_sqrt: np.ndarray
    sqrt: np.ndarray


def fit_scatter(points: np.ndarray) -> ScatterTransform:
    """Sample mean and covariance; square roots by spectral decomposition."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise ConfigError("points must be an (n, d) array")
    n, d = points.shape
    if n <= d:
        raise ConfigError(f"need more than {d} points to fit a {d}-D scatter")
    loc = points.mean(axis=0)
    cov = np.cov(points, rowvar=False, ddof=1).reshape(d, d)
    vals, vecs = np.linalg.eigh(cov)
    if vals.min() <= 1e-12 * max(vals.max(), 1.0):
        raise ConfigError("singular covariance; points are degenerate")
    inv_sqrt = (vecs * (1.0 / np.sqrt(vals))) @ vecs.T
    sqrt = (vecs * np.sqrt(vals)) @ vecs.T
    return ScatterTransform(loc, cov, inv_sqrt, sqrt)


def whiten(transform: ScatterTransform, points: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    return (points - transform.location) @ transform.inverse_sqrt


def unwhiten(transform: ScatterTransform, points: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    return points @ transform.sqrt + transform.location


# ----------------------------- Tukey reference ------------------------------

def tukey_depth_2d(points: np.ndarray, query, m: int = 720) -> float:
    """Brute-force halfspace depth over m equispaced directions.

    Returns the minimum over directions a of the fraction of sample points
    y with (query - y) . a >= 0.  A finite m overestimates the true depth;
    the value is nonincreasing in m.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2 or points.shape[0] == 0:
        raise ConfigError("points must be a nonempty (n, 2) array")
    if m < 16:
        raise ConfigError(f"need at least 16 directions, got {m}")
    ang = np.arange(m) * (2.0 * math.pi / m)
    dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    proj = (np.asarray(query, dtype=float) - points) @ dirs.T
    return float((proj >= 0.0).mean(axis=0).min())


# -------------------------------- warp maps ---------------------------------

# max |g'| of the bump profile g(t) = (1 - t^2)^3 on [0, 1], at t = 1/sqrt(5)
_BUMP_DG_MAX = 96.0 / (25.0 * math.sqrt(5.0))


@dataclass(frozen=True)
class WarpMap:
    """Smooth invertible map with a declared sup bound on |DPhi - I|.

    Built-in family: identity, a compact radial bump displacement
    Phi(x) = x + A g(|x - p| / r) v with g(t) = (1 - t^2)^3, and a planar
    rotation.  Rigid members (identity, rotation) carry epsilon = 0 and are
    exempt from the Jacobian-proximity reading: they preserve depth exactly
    rather than approximately.
    """

    kind: str
    dim: int
    epsilon: float
    rigid: bool
    center: np.ndarray | None = None
    radius: float = 0.0
    amplitude: float = 0.0
    direction: np.ndarray | None = None
    angle: float = 0.0

    @staticmethod
    def identity(dim: int) -> "WarpMap":
        return WarpMap("identity", dim, 0.0, True)

    @staticmethod
    def bump(center, radius: float, direction, epsilon: float) -> "WarpMap":
        center = np.asarray(center, dtype=float)
        direction = np.asarray(direction, dtype=float)
        nrm = np.linalg.norm(direction)
        if nrm == 0.0:
            raise ConfigError("bump direction must be nonzero")
        if not 0.0 < epsilon < 1.0:
            raise ConfigError(f"epsilon must be in (0, 1), got {epsilon}")
        if not radius > 0.0:
            raise ConfigError(f"radius must be positive, got {radius}")
        # amplitude chosen so sup |DPhi - I| = (A/r) max|g'| equals epsilon
        amplitude = epsilon * radius / _BUMP_DG_MAX
        return WarpMap("bump", center.size, epsilon, False, center, radius,
                       amplitude, direction / nrm)

    @staticmethod
    def rotation(angle: float) -> "WarpMap":
        return WarpMap("rotation", 2, 0.0, True, angle=float(angle))

    @property
    def displacement(self) -> float:
        """Distance the bump center moves (zero for rigid members)."""
        return self.amplitude if self.kind == "bump" else 0.0

    def _rot(self) -> np.ndarray:
        c, s = math.cos(self.angle), math.sin(self.angle)
        return np.array([[c, -s], [s, c]])

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.kind == "identity":
            return x.copy()
        if self.kind == "rotation":
            return x @ self._rot().T
        z = x - self.center
        t = np.linalg.norm(z, axis=1) / self.radius
        g = np.where(t < 1.0, (1.0 - t * t) ** 3, 0.0)
        return x + self.amplitude * g[:, None] * self.direction

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        """Per-point (d, d) Jacobians, shape (n, d, d)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        n, d = x.shape
        eye = np.broadcast_to(np.eye(d), (n, d, d)).copy()
        if self.kind in ("identity",):
            return eye
        if self.kind == "rotation":
            return np.broadcast_to(self._rot(), (n, d, d)).copy()
        z = x - self.center
        rr = np.linalg.norm(z, axis=1)
        t = rr / self.radius
        inside = (t < 1.0) & (rr > 0.0)
        dg = np.zeros(n)
        dg[inside] = -6.0 * t[inside] * (1.0 - t[inside] ** 2) ** 2
        coef = self.amplitude / self.radius * dg
        zhat = np.zeros_like(z)
        zhat[inside] = z[inside] / rr[inside, None]
        return eye + coef[:, None, None] * np.einsum("i,nj->nij",
                                                     self.direction, zhat)

    def det_jacobian(self, x: np.ndarray) -> np.ndarray:
        """Determinant via the rank-one structure: 1 + (A/r) g'(t) (v . zhat)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.kind in ("identity", "rotation"):
            return np.ones(x.shape[0])
        z = x - self.center
        rr = np.linalg.norm(z, axis=1)
        t = rr / self.radius
        inside = (t < 1.0) & (rr > 0.0)
        out = np.ones(x.shape[0])
        dg = -6.0 * t[inside] * (1.0 - t[inside] ** 2) ** 2
        vdot = (z[inside] @ self.direction) / rr[inside]
        out[inside] = 1.0 + self.amplitude / self.radius * dg * vdot
        return out

    def inverse(self, y: np.ndarray, tol: float = 1e-12,
                max_iter: int = 100) -> np.ndarray:
        """Newton inversion, batched over points."""
        y = np.atleast_2d(np.asarray(y, dtype=float))
        if self.kind == "identity":
            return y.copy()
        if self.kind == "rotation":
            return y @ self._rot()
        x = y.copy()
        for _ in range(max_iter):
            res = self.apply(x) - y
            if np.abs(res).max() <= tol:
                return x
            x -= np.linalg.solve(self.jacobian(x), res[:, :, None])[:, :, 0]
        raise ConfigError("warp inversion did not converge")

    def estimated_epsilon(self, lo, hi, probes_per_axis: int = 101) -> float:
        """Sup of the spectral norm of DPhi - I over a probe grid in [lo, hi]."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        axes = [np.linspace(lo[a], hi[a], probes_per_axis)
                for a in range(lo.size)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        pts = grid.reshape(-1, lo.size)
        dj = self.jacobian(pts) - np.eye(lo.size)
        return float(np.linalg.svd(dj, compute_uv=False)[:, 0].max())


# ------------------------------ report record -------------------------------

@dataclass(frozen=True)
class PropertyReport:
    name: str
    passed: bool
    observed_margin: float
    tolerance: float
    details: str = ""


def make_report(name: str, observed_margin: float, tolerance: float,
                details: str = "") -> PropertyReport:
    margin = float(observed_margin)
    return PropertyReport(name, margin <= tolerance, margin, float(tolerance),
                          details)


def report_line(report: PropertyReport) -> str:
    return json.dumps({
        "name": report.name,
        "pass": report.passed,
        "observed_margin": float("%.12g" % report.observed_margin),
        "tolerance": float("%.12g" % report.tolerance),
        "details": report.details,
    })


def write_reports(fh, reports) -> bool:
    """Emit reports as JSON lines; returns True iff all passed."""
    ok = True
    for rep in reports:
        fh.write(report_line(rep) + "\n")
        ok = ok and rep.passed
    return ok


# --------------------------- robustness sandwich ----------------------------

def _interior_probes(grid: GridSpec, count_per_axis: int = 10) -> np.ndarray:
    """Deterministic lattice of interior probe points (node positions)."""
    idx = [np.linspace(grid.dims[a] // 5, grid.dims[a] - 1 - grid.dims[a] // 5,
                       count_per_axis).round().astype(int)
           for a in range(grid.dim)]
    mesh = np.meshgrid(*idx, indexing="ij")
    pts = np.stack([grid.origin[a] + mesh[a].ravel() * grid.spacing
                    for a in range(grid.dim)], axis=1)
    return pts


def isometric_robustness_check(subject, warp: WarpMap,
                               phi: PhiSpec | None = None, *, n: int = 129,
                               kernel: "graphs.KernelSpec | None" = None,
                               boundary=None, rho=None,
                               slack: float | None = None) -> PropertyReport:
    """Sandwich (1 - eps) D(x) <= D~(Phi(x)) <= (1 + eps) D(x) at probes.

    Density subjects are pushed forward exactly through the change of
    variables rho~(Phi(x)) = rho(x) / |det DPhi(x)| on the solve grid.
    Point-cloud subjects (an (n, d) array plus kernel and boundary) are
    warped sample-wise and re-solved; that empirical variant is marked in
    the report details.  Rigid warps demand equality up to 1e-9.
    """
    phi = PhiSpec.unnormalized() if phi is None else phi
    if isinstance(subject, np.ndarray) or (kernel is not None):
        return _sandwich_cloud(np.asarray(subject, dtype=float), warp, kernel,
                               boundary, rho, slack)
    return _sandwich_grid(subject, warp, phi, n, slack)


def _sandwich_grid(model: DensityModel, warp: WarpMap, phi: PhiSpec,
                   n: int, slack: float | None) -> PropertyReport:
    domain = dens.default_domain(model)
    grid = gridsolve.make_grid(domain, n)
    nodes = grid.nodes()
    speed = phi.apply(dens.eval_density(model, nodes)).reshape(grid.dims)
    u = DepthField(grid, gridsolve.fast_marching(speed, grid.spacing,
                                                 grid.edge_mask()))
    pre = warp.inverse(nodes)
    det = warp.det_jacobian(pre)
    if det.min() <= 0.0:
        raise ConfigError("warp is not invertible on the domain "
                          f"(min Jacobian determinant {det.min():.3g})")
    pushed = dens.eval_density(model, pre) / det
    speed_w = phi.apply(pushed).reshape(grid.dims)
    uw = DepthField(grid, gridsolve.fast_marching(speed_w, grid.spacing,
                                                  grid.edge_mask()))
    slack = 3.0 * grid.spacing if slack is None else slack
    if warp.rigid:
        slack = min(slack, 1e-9)
    probes = _interior_probes(grid)
    base = np.array([u.depth_at(p) for p in probes])
    mapped = np.array([uw.depth_at(q) for q in warp.apply(probes)])
    eps = warp.epsilon
    margin = float(np.max(np.maximum(mapped - (1.0 + eps) * base,
                                     (1.0 - eps) * base - mapped)))
    return make_report("isometric_sandwich_grid", margin, slack,
                       f"eps={eps:g} n={n} probes={len(probes)}")


def _sandwich_cloud(points: np.ndarray, warp: WarpMap, kernel, boundary,
                    rho, slack: float | None) -> PropertyReport:
    if kernel is None or boundary is None:
        raise ConfigError("cloud subject needs a kernel and a boundary set")
    rho = np.ones(points.shape[0]) if rho is None else np.asarray(rho, float)
    g0 = graphs.build_kernel_graph(points, kernel)
    d0 = graphs.pointcloud_eikonal(g0, rho=rho, boundary=boundary)
    g1 = graphs.build_kernel_graph(warp.apply(points), kernel)
    d1 = graphs.pointcloud_eikonal(g1, rho=rho, boundary=boundary)
    slack = 0.05 if slack is None else slack
    if warp.rigid:
        slack = min(slack, 1e-9)
    eps = warp.epsilon
    ok = np.isfinite(d0.values) & np.isfinite(d1.values)
    margin = float(np.max(np.maximum(
        d1.values[ok] - (1.0 + eps) * d0.values[ok],
        (1.0 - eps) * d0.values[ok] - d1.values[ok])))
    return make_report("isometric_sandwich_cloud", margin, slack,
                       f"eps={eps:g} empirical variant (warped samples)")


# ------------------------------ density surgery -----------------------------

def carve_channel(model: GridDensity, path, width: float, floor: float):
    """Set the density to ``floor`` on a width-tube around a polyline.

    Returns (carved GridDensity, removed mass).  Width 0 is a no-op; the
    floor is only ever applied where it lowers the density.
    """
    if not isinstance(model, GridDensity):
        raise ConfigError("carving needs a gridded density")
    path = np.atleast_2d(np.asarray(path, dtype=float))
    if path.shape[0] < 2 or path.shape[1] != model.dim:
        raise ConfigError("path must be a polyline of the density's dimension")
    if width < 0.0 or floor < 0.0:
        raise ConfigError("width and floor must be nonnegative")
    if width == 0.0:
        return model, 0.0
    dims = model.values.shape
    axes = [model.origin[a] + model.spacing[a] * np.arange(dims[a])
            for a in range(model.dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([m.ravel() for m in mesh], axis=1)
    dist = np.full(nodes.shape[0], np.inf)
    for a, b in zip(path[:-1], path[1:]):
        seg = b - a
        len2 = float(seg @ seg)
        if len2 == 0.0:
            proj = np.zeros(nodes.shape[0])
        else:
            proj = np.clip((nodes - a) @ seg / len2, 0.0, 1.0)
        close = a + proj[:, None] * seg
        dist = np.minimum(dist, np.linalg.norm(nodes - close, axis=1))
    tube = dist <= width / 2.0
    values = model.values.copy().ravel()
    removed = values[tube] - np.minimum(values[tube], floor)
    values[tube] = np.minimum(values[tube], floor)
    cell = float(np.prod(model.spacing))
    carved = GridDensity(model.origin, model.spacing, values.reshape(dims))
    return carved, float(removed.sum() * cell)


# ------------------------------ named checks --------------------------------

def stability_check(model1: DensityModel, model2: DensityModel, c: float,
                    C: float, phi: PhiSpec | None = None,
                    n: int = 65) -> PropertyReport:
    """Sup-node |u1 - u2| <= ell ||rho1 - rho2||_inf + 3h, ell = diam C/(2c)."""
    phi = PhiSpec.unnormalized() if phi is None else phi
    domain = dens.default_domain(model1)
    grid = gridsolve.make_grid(domain, n)
    nodes = grid.nodes()
    r1 = dens.eval_density(model1, nodes)
    r2 = dens.eval_density(model2, nodes)
    for r in (r1, r2):
        if r.min() < c - 1e-9 or r.max() > C + 1e-9:
            raise ConfigError("density leaves the declared bounds "
                              f"[{c}, {C}]: range [{r.min():.3g}, {r.max():.3g}]")
    ext = domain.hi - domain.lo
    ell = float(np.linalg.norm(ext)) * C / (2.0 * c)
    edge = grid.edge_mask()
    u1 = gridsolve.fast_marching(phi.apply(r1).reshape(grid.dims),
                                 grid.spacing, edge)
    u2 = gridsolve.fast_marching(phi.apply(r2).reshape(grid.dims),
                                 grid.spacing, edge)
    diff = float(np.abs(u1 - u2).max())
    bound = ell * float(np.abs(r1 - r2).max())
    return make_report("stability", diff - bound, 3.0 * grid.spacing,
                       f"ell={ell:.6g} sup|du|={diff:.6g} bound={bound:.6g}")


def mode_separation_predicate(mixture: GaussianMixture) -> bool:
    """True iff all pairwise mean distances strictly exceed 4 sigma.

    Requires a common isotropic covariance sigma^2 I; a single component
    is vacuously separated.
    """
    if not isinstance(mixture, GaussianMixture):
        raise ConfigError("mode separation is defined for Gaussian mixtures")
    covs = mixture.covs
    s2 = covs[0][0, 0]
    eye = np.eye(mixture.dim)
    for cov in covs:
        if not np.allclose(cov, s2 * eye, rtol=0.0, atol=1e-12 * max(1.0, s2)):
            raise ConfigError("mixture covariances are not a common "
                              "isotropic sigma^2 I")
    sigma = math.sqrt(s2)
    k = mixture.means.shape[0]
    for i in range(k):
        for j in range(i + 1, k):
            if np.linalg.norm(mixture.means[i] - mixture.means[j]) <= 4.0 * sigma:
                return False
    return True


def _random_speed(rng, dims, lo: float, hi: float) -> np.ndarray:
    return rng.uniform(lo, hi, size=dims)


def check_comparison(n: int = 65, pairs: int = 50, seed: int = 0):
    """Monotone speeds f1 <= f2 must give u1 <= u2 nodewise."""
    rng = np.random.default_rng(seed)
    grid = GridSpec((n, n), np.zeros(2), 1.0 / (n - 1))
    edge = grid.edge_mask()
    worst = -np.inf
    for _ in range(pairs):
        f1 = _random_speed(rng, grid.dims, 0.1, 2.0)
        f2 = f1 + rng.uniform(0.0, 1.0, size=grid.dims)
        u1 = gridsolve.fast_marching(f1, grid.spacing, edge)
        u2 = gridsolve.fast_marching(f2, grid.spacing, edge)
        worst = max(worst, float((u1 - u2).max()))
    return [make_report("comparison", worst, 1e-12,
                        f"pairs={pairs} n={n} seed={seed}")]


def check_scaling(alpha: float = 0.5, a: float = 2.0, n: int = 129,
                  shift=(0.3, -0.2)):
    """u~(a x + c) = a^(1 - alpha d) u(x) on matched grids, 100 probes."""
    phi = PhiSpec(alpha)
    shift = np.asarray(shift, dtype=float)
    base = GaussianMixture(
        np.array([0.5, 0.5]),
        np.array([[0.35, 0.45], [0.65, 0.55]]),
        np.array([0.02 * np.eye(2)] * 2))
    scaled = GaussianMixture(
        base.weights,
        a * base.means + shift,
        (a * a) * base.covs)
    grid = gridsolve.make_grid(dens.default_domain(base), n)
    sgrid = GridSpec(grid.dims, a * grid.origin + shift, a * grid.spacing)
    u = gridsolve.solve_depth(base, phi, grid=grid)
    us = gridsolve.solve_depth(scaled, phi, grid=sgrid)
    side = np.linspace(grid.dims[0] // 5, 4 * grid.dims[0] // 5, 10,
                       dtype=int)
    ii, jj = np.meshgrid(side, side, indexing="ij")
    factor = a ** phi.scale_exponent(2)
    diff = us.values[ii, jj] - factor * u.values[ii, jj]
    tol = 3.0 * max(grid.spacing, sgrid.spacing)
    return [make_report("scaling", float(np.abs(diff).max()), tol,
                        f"a={a:g} alpha={alpha:g} factor={factor:.6g}")]


def check_rigid(n: int = 65, n_points: int = 600, seed: int = 0):
    """Quarter-turn on grids and arbitrary rotation on clouds preserve depth."""
    rng = np.random.default_rng(seed)
    grid = GridSpec((n, n), np.zeros(2), 1.0 / (n - 1))
    f = _random_speed(rng, grid.dims, 0.1, 2.0)
    edge = grid.edge_mask()
    u = gridsolve.fast_marching(f, grid.spacing, edge)
    ur = gridsolve.fast_marching(np.rot90(f).copy(), grid.spacing, edge)
    gmargin = float(np.abs(np.rot90(u) - ur).max())
    rep_grid = make_report("rigid_grid", gmargin, 1e-12, f"n={n} quarter turn")

    pts = rng.random((n_points, 2))
    ker = graphs.KernelSpec("indicator", h=0.15, dim=2)
    bnd = np.zeros(n_points, dtype=bool)
    bnd[:40] = True
    rho = np.ones(n_points)
    theta = 0.7
    rot = np.array([[math.cos(theta), -math.sin(theta)],
                    [math.sin(theta), math.cos(theta)]])
    d0 = graphs.pointcloud_eikonal(graphs.build_kernel_graph(pts, ker),
                                   rho=rho, boundary=bnd)
    d1 = graphs.pointcloud_eikonal(graphs.build_kernel_graph(pts @ rot.T, ker),
                                   rho=rho, boundary=bnd)
    p0 = graphs.path_depth(graphs.build_kernel_graph(pts, ker),
                           rho=rho, boundary=bnd)
    p1 = graphs.path_depth(graphs.build_kernel_graph(pts @ rot.T, ker),
                           rho=rho, boundary=bnd)
    cmargin = max(float(np.abs(d0.values - d1.values).max()),
                  float(np.abs(p0.values - p1.values).max()))
    rep_cloud = make_report("rigid_cloud", cmargin, 1e-12,
                            f"n_points={n_points} theta={theta:g}")
    return [rep_grid, rep_cloud]


def check_sandwich(epsilon: float = 0.1, n: int = 129):
    """Bump warp on the uniform square; slack 3h."""
    model = UniformBox(np.zeros(2), np.ones(2))
    warp = WarpMap.bump((0.5, 0.5), 0.15, (1.0, 0.0), epsilon)
    return [isometric_robustness_check(model, warp, PhiSpec.unnormalized(),
                                       n=n)]


def check_stability(n: int = 65, pairs: int = 20, seed: int = 0):
    """Random density pairs in [0.5, 2] on the unit square."""
    rng = np.random.default_rng(seed)
    worst = None
    grid = gridsolve.make_grid(
        dens.Domain(np.zeros(2), np.ones(2), bounded=True), n)
    for _ in range(pairs):
        v1 = rng.uniform(0.5, 2.0, size=grid.dims)
        v2 = np.clip(v1 + rng.uniform(-0.3, 0.3, size=grid.dims), 0.5, 2.0)
        m1 = GridDensity(grid.origin, grid.spacing * np.ones(2), v1)
        m2 = GridDensity(grid.origin, grid.spacing * np.ones(2), v2)
        rep = stability_check(m1, m2, 0.5, 2.0, n=n)
        if worst is None or rep.observed_margin > worst.observed_margin:
            worst = rep
    return [make_report("stability", worst.observed_margin, worst.tolerance,
                        f"pairs={pairs} seed={seed} worst: {worst.details}")]


def check_modes(sep_sigmas: float = 4.0, sigma: float = 0.25, n: int = 257):
    """Two-component mixture: count depth maxima against the separation rule.

    Expected count is 2 at separations of at least 4 sigma, else 1; the
    strict greater-than predicate value is recorded alongside.
    """
    sep = sep_sigmas * sigma
    mix = GaussianMixture(
        np.array([0.5, 0.5]),
        np.array([[0.0, 0.0], [sep, 0.0]]),
        np.array([sigma * sigma * np.eye(2)] * 2))
    field = gridsolve.solve_depth(mix, PhiSpec.normalized(2), n=n)
    count = len(field.local_maxima())
    expected = 2 if sep >= 4.0 * sigma - 1e-12 else 1
    predicate = mode_separation_predicate(mix)
    return [make_report("modes", float(abs(count - expected)), 0.0,
                        f"sep={sep:g} maxima={count} expected={expected} "
                        f"strict_predicate={predicate}")]


def check_supersolution(which: str = "uniform", n: int = 201):
    """Axis-marginal supersolution dominates every grid value (alpha = 1)."""
    if which == "uniform":
        model = UniformBox(np.zeros(2), np.ones(2))
    elif which == "gaussian":
        model = dens.standard_gaussian(2)
    else:
        raise ConfigError(f"unknown supersolution subject '{which}'")
    field = gridsolve.solve_depth(model, PhiSpec.unnormalized(), n=n)
    nodes = field.grid.nodes()
    v = np.array([dens.supersolution_bound(model, p) for p in nodes])
    margin = float((field.values.ravel() - v).max())
    return [make_report(f"supersolution_{which}", margin,
                        3.0 * field.grid.spacing, f"n={n}")]

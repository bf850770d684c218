"""Density models and analytic reference depths.

This module provides the probability-density side of the library:

* ``PhiSpec`` -- the power cost profile ``phi(s) = s**alpha`` applied to a
  density before it is used as a front speed.  ``alpha = 1`` is the
  unnormalized convention, ``alpha = 1/d`` the normalized one.
* Density models: ``GaussianMixture``, ``UniformBox``, ``UniformBall``,
  ``TruncatedPowerLaw``, ``CylinderSurface`` and ``GridDensity``.  Each
  model evaluates pointwise (vectorized over rows) and, except where noted,
  draws seeded samples.
* Analytic/quadrature references used as oracles by the solvers:
  one-dimensional quantile depth, the radial Gaussian profile, the uniform
  ball closed form, the marginal-tail upper bound and the truncated
  power-law lower bound.
* JSON configuration round-trips, including the grid header + ``.f64``
  payload convention for tabulated densities.

All randomness goes through ``numpy.random.default_rng(seed)``; the same
seed reproduces the same draws bit for bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate
from scipy.optimize import brentq
from scipy.special import ndtr

__all__ = [
    "PhiSpec",
    "GaussianMixture",
    "UniformBox",
    "UniformBall",
    "TruncatedPowerLaw",
    "CylinderSurface",
    "GridDensity",
    "Domain",
    "standard_gaussian",
    "eval_density",
    "apply_phi",
    "sample",
    "quantile_depth_1d",
    "gaussian_radial_depth",
    "ball_uniform_depth",
    "supersolution_bound",
    "powerlaw_depth_lower_bound",
    "unit_ball_volume",
    "sphere_area",
    "default_domain",
    "model_to_config",
    "model_from_config",
    "load_density",
    "save_density",
]

_QUAD_ABS_TOL = 1e-10  # target well below the 1e-8 contract


# ----------------------------- geometry constants -----------------------------

def unit_ball_volume(d: int) -> float:
    """Volume of the unit ball in R^d."""
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere S^{d-1} in R^d."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


# ----------------------------------- phi -----------------------------------

@dataclass(frozen=True)
class PhiSpec:
    """Power cost profile s -> s**alpha applied to density values."""

    alpha: float

    def __post_init__(self) -> None:
        if not (self.alpha > 0.0 and math.isfinite(self.alpha)):
            raise ValueError(f"phi exponent must be positive, got {self.alpha}")

    @staticmethod
    def unnormalized() -> "PhiSpec":
        return PhiSpec(1.0)

    @staticmethod
    def normalized(d: int) -> "PhiSpec":
        if d < 1:
            raise ValueError(f"dimension must be >= 1, got {d}")
        return PhiSpec(1.0 / d)

    def apply(self, s):
        s = np.asarray(s, dtype=float)
        if np.any(s < 0.0):
            raise ValueError("phi is defined for nonnegative arguments only")
        out = np.power(s, self.alpha)
        return float(out) if out.ndim == 0 else out

    def scale_exponent(self, d: int) -> float:
        """Exponent in the rescaling law u_tilde(a x + c) = a**(1 - alpha d) u(x)."""
        return 1.0 - self.alpha * d


def apply_phi(phi: PhiSpec, s):
    return phi.apply(s)


# ------------------------------ density models ------------------------------

def _rows(x, dim: int) -> tuple[np.ndarray, bool]:
    """Normalize point input to shape (n, dim); report whether it was a single point."""
    a = np.asarray(x, dtype=float)
    if a.ndim == 1:
        if a.shape[0] != dim:
            raise ValueError(f"expected a point in R^{dim}, got shape {a.shape}")
        return a[None, :], True
    if a.ndim == 2 and a.shape[1] == dim:
        return a, False
    raise ValueError(f"expected shape (n, {dim}) or ({dim},), got {a.shape}")


@dataclass(frozen=True)
class GaussianMixture:
    """Finite Gaussian mixture with full covariances."""

    weights: np.ndarray
    means: np.ndarray
    covs: np.ndarray

    def __post_init__(self) -> None:
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        m = np.atleast_2d(np.asarray(self.means, dtype=float))
        c = np.asarray(self.covs, dtype=float)
        if c.ndim == 2:
            c = c[None, :, :]
        if w.ndim != 1 or m.shape[0] != w.shape[0] or c.shape[0] != w.shape[0]:
            raise ValueError("weights, means and covs must agree on component count")
        if c.shape[1] != m.shape[1] or c.shape[2] != m.shape[1]:
            raise ValueError("covariance blocks must be square of the mean dimension")
        if np.any(w <= 0.0) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("mixture weights must be positive and sum to 1")
        for k in range(c.shape[0]):
            # raises LinAlgError for non-PD blocks
            np.linalg.cholesky(c[k])
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", m)
        object.__setattr__(self, "covs", c)

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def density_at(self, x) -> float | np.ndarray:
        pts, single = _rows(x, self.dim)
        out = np.zeros(pts.shape[0])
        for w, m, c in zip(self.weights, self.means, self.covs):
            L = np.linalg.cholesky(c)
            z = np.linalg.solve(L, (pts - m).T)
            logdet = 2.0 * np.log(np.diag(L)).sum()
            q = (z * z).sum(axis=0)
            out += w * np.exp(-0.5 * (q + logdet + self.dim * math.log(2.0 * math.pi)))
        return float(out[0]) if single else out

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if n == 0:
            return np.empty((0, self.dim))
        comp = rng.choice(self.weights.shape[0], size=n, p=self.weights)
        out = np.empty((n, self.dim))
        for k in range(self.weights.shape[0]):
            idx = np.flatnonzero(comp == k)
            if idx.size:
                L = np.linalg.cholesky(self.covs[k])
                out[idx] = self.means[k] + rng.standard_normal((idx.size, self.dim)) @ L.T
        return out

    def marginal_tail_left(self, x) -> np.ndarray:
        """Integral of the density over xi < x1 along the first axis, x' fixed.

        Closed form: each component factorizes into the marginal of the
        remaining coordinates times a conditional normal CDF in x1.
        """
        pts, _ = _rows(x, self.dim)
        out = np.zeros(pts.shape[0])
        for w, m, c in zip(self.weights, self.means, self.covs):
            if self.dim == 1:
                out += w * ndtr((pts[:, 0] - m[0]) / math.sqrt(c[0, 0]))
                continue
            crr = c[1:, 1:]
            c1r = c[0, 1:]
            sol = np.linalg.solve(crr, c1r)
            sig2 = c[0, 0] - c1r @ sol
            mu_c = m[0] + (pts[:, 1:] - m[1:]) @ sol
            L = np.linalg.cholesky(crr)
            z = np.linalg.solve(L, (pts[:, 1:] - m[1:]).T)
            logdet = 2.0 * np.log(np.diag(L)).sum()
            marg = np.exp(-0.5 * ((z * z).sum(axis=0) + logdet
                                  + (self.dim - 1) * math.log(2.0 * math.pi)))
            out += w * marg * ndtr((pts[:, 0] - mu_c) / math.sqrt(sig2))
        return out


def standard_gaussian(d: int) -> GaussianMixture:
    """Standard normal N(0, I_d) as a one-component mixture."""
    return GaussianMixture(np.array([1.0]), np.zeros((1, d)), np.eye(d)[None])


@dataclass(frozen=True)
class UniformBox:
    """Uniform density on an axis-aligned box."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self) -> None:
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape or np.any(hi <= lo):
            raise ValueError("box must satisfy lo < hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    @property
    def value(self) -> float:
        return float(1.0 / np.prod(self.hi - self.lo))

    def density_at(self, x):
        pts, single = _rows(x, self.dim)
        inside = np.all((pts >= self.lo) & (pts <= self.hi), axis=1)
        out = np.where(inside, self.value, 0.0)
        return float(out[0]) if single else out

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=(n, self.dim))


@dataclass(frozen=True)
class UniformBall:
    """Uniform density on a euclidean ball."""

    center: np.ndarray
    radius: float

    def __post_init__(self) -> None:
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        if not self.radius > 0.0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", c)

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    @property
    def value(self) -> float:
        return float(1.0 / (unit_ball_volume(self.dim) * self.radius ** self.dim))

    def density_at(self, x):
        pts, single = _rows(x, self.dim)
        r = np.linalg.norm(pts - self.center, axis=1)
        out = np.where(r <= self.radius, self.value, 0.0)
        return float(out[0]) if single else out

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        z = rng.standard_normal((n, self.dim))
        nrm = np.linalg.norm(z, axis=1, keepdims=True)
        nrm[nrm == 0.0] = 1.0
        u = rng.uniform(size=(n, 1)) ** (1.0 / self.dim)
        return self.center + self.radius * u * z / nrm


@dataclass(frozen=True)
class TruncatedPowerLaw:
    """Radial |x|^{-d} profile on the unit ball, capped inside radius epsilon.

    Outside radius ``epsilon`` the density decays like ``|x|**-d`` normalized
    to carry mass ``1 - delta``; inside it is the constant that makes the
    profile continuous at ``|x| = epsilon``.  The matching constant ``delta``
    is solved numerically to 1e-12.
    """

    epsilon: float
    dim: int
    delta: float = field(init=False)

    def __post_init__(self) -> None:
        if not (0.0 < self.epsilon < 1.0):
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.dim < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dim}")
        s = sphere_area(self.dim)
        v = unit_ball_volume(self.dim)
        neg_log = -math.log(self.epsilon)

        def mismatch(delta: float) -> float:
            return (1.0 - delta) / (neg_log * s) - delta / v

        object.__setattr__(self, "delta", brentq(mismatch, 0.0, 1.0, xtol=1e-12, rtol=8.9e-16))

    @property
    def inner_value(self) -> float:
        return self.delta / (unit_ball_volume(self.dim) * self.epsilon ** self.dim)

    def density_at(self, x):
        pts, single = _rows(x, self.dim)
        r = np.linalg.norm(pts, axis=1)
        s = sphere_area(self.dim)
        neg_log = -math.log(self.epsilon)
        outer = np.zeros_like(r)
        mask = (r >= self.epsilon) & (r <= 1.0)
        outer[mask] = (1.0 - self.delta) * r[mask] ** (-self.dim) / (neg_log * s)
        out = np.where(r < self.epsilon, self.inner_value, outer)
        out[r > 1.0] = 0.0
        return float(out[0]) if single else out

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if n == 0:
            return np.empty((0, self.dim))
        u = rng.uniform(size=n)
        v = rng.uniform(size=n)
        inner = u < self.delta
        r = np.empty(n)
        r[inner] = self.epsilon * v[inner] ** (1.0 / self.dim)
        r[~inner] = self.epsilon ** (1.0 - v[~inner])
        z = rng.standard_normal((n, self.dim))
        nrm = np.linalg.norm(z, axis=1, keepdims=True)
        nrm[nrm == 0.0] = 1.0
        return r[:, None] * z / nrm


@dataclass(frozen=True)
class CylinderSurface:
    """Striped intensity on the unit cylinder, embedded in R^3.

    Intrinsic coordinates are the angle theta and the height z on
    ``[-z_pad, 1 + z_pad]``; the surface point is (cos theta, sin theta, z)
    and the intensity is ``1 - 0.9 sin^2(pi/2 + 0.5 pi z + 3 theta)``.
    The profile is treated as an unnormalized surface intensity.
    """

    z_pad: float = 0.05

    @property
    def dim(self) -> int:
        return 3

    @property
    def z_lo(self) -> float:
        return -self.z_pad

    @property
    def z_hi(self) -> float:
        return 1.0 + self.z_pad

    def intensity(self, theta, z):
        theta = np.asarray(theta, dtype=float)
        z = np.asarray(z, dtype=float)
        return 1.0 - 0.9 * np.sin(0.5 * math.pi + 0.5 * math.pi * z + 3.0 * theta) ** 2

    def density_at(self, x):
        pts, single = _rows(x, 3)
        r = np.hypot(pts[:, 0], pts[:, 1])
        theta = np.arctan2(pts[:, 1], pts[:, 0])
        on = (np.abs(r - 1.0) <= 1e-8) & (pts[:, 2] >= self.z_lo) & (pts[:, 2] <= self.z_hi)
        out = np.where(on, self.intensity(theta, pts[:, 2]), 0.0)
        return float(out[0]) if single else out

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        out = np.empty((n, 3))
        got = 0
        while got < n:
            m = max(2 * (n - got), 64)
            theta = rng.uniform(0.0, 2.0 * math.pi, size=m)
            z = rng.uniform(self.z_lo, self.z_hi, size=m)
            keep = rng.uniform(size=m) < self.intensity(theta, z)
            take = min(int(keep.sum()), n - got)
            idx = np.flatnonzero(keep)[:take]
            out[got:got + take, 0] = np.cos(theta[idx])
            out[got:got + take, 1] = np.sin(theta[idx])
            out[got:got + take, 2] = z[idx]
            got += take
        return out


@dataclass(frozen=True)
class GridDensity:
    """Density tabulated on a uniform grid, multilinear in between, zero outside."""

    origin: np.ndarray
    spacing: np.ndarray  # scalar input broadcasts to every axis
    values: np.ndarray
    probability: bool = False

    def __post_init__(self) -> None:
        origin = np.atleast_1d(np.asarray(self.origin, dtype=float))
        values = np.asarray(self.values, dtype=float)
        if values.ndim != origin.shape[0]:
            raise ValueError("origin dimension must match the value array rank")
        spacing = np.broadcast_to(np.asarray(self.spacing, dtype=float),
                                  origin.shape).copy()
        if not np.all(spacing > 0.0):
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        if np.any(values < 0.0) or not np.all(np.isfinite(values)):
            raise ValueError("grid density values must be finite and nonnegative")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "values", values)
        if self.probability:
            mass = values.sum() * float(np.prod(spacing))
            if abs(mass - 1.0) > 0.05:
                raise ValueError(f"grid flagged as probability but Riemann mass is {mass:.4g}")

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def hi(self) -> np.ndarray:
        return self.origin + self.spacing * (np.array(self.values.shape) - 1)

    def density_at(self, x):
        out = multilinear_interp(self.origin, self.spacing, self.values, x, fill=0.0)
        return out

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        # rejection against the max over the bounding box
        vmax = float(self.values.max())
        if vmax <= 0.0:
            raise ValueError("cannot sample from an identically zero grid density")
        out = np.empty((n, self.dim))
        got = 0
        while got < n:
            m = max(2 * (n - got), 64)
            cand = rng.uniform(self.origin, self.hi, size=(m, self.dim))
            keep = rng.uniform(0.0, vmax, size=m) < self.density_at(cand)
            take = min(int(keep.sum()), n - got)
            out[got:got + take] = cand[np.flatnonzero(keep)[:take]]
            got += take
        return out


def multilinear_interp(origin, spacing, values, x, fill=0.0):
    """Multilinear interpolation on a uniform grid; ``fill`` outside the hull."""
    origin = np.atleast_1d(np.asarray(origin, dtype=float))
    values = np.asarray(values, dtype=float)
    d = values.ndim
    pts, single = _rows(x, d)
    t = (pts - origin) / spacing
    inside = np.all((t >= 0.0) & (t <= np.array(values.shape) - 1), axis=1)
    tc = np.clip(t, 0.0, np.array(values.shape) - 1)
    i0 = np.minimum(tc.astype(np.int64), np.array(values.shape) - 2)
    i0 = np.maximum(i0, 0)
    frac = tc - i0
    out = np.zeros(pts.shape[0])
    for corner in range(1 << d):
        w = np.ones(pts.shape[0])
        idx = []
        for a in range(d):
            bit = (corner >> a) & 1
            idx.append(i0[:, a] + bit)
            w = w * (frac[:, a] if bit else 1.0 - frac[:, a])
        out += w * values[tuple(idx)]
    out = np.where(inside, out, fill)
    return float(out[0]) if single else out


DensityModel = (GaussianMixture, UniformBox, UniformBall,
                TruncatedPowerLaw, CylinderSurface, GridDensity)


# ---------------------------------- domains ----------------------------------

@dataclass(frozen=True)
class Domain:
    """Axis-aligned computational box, either an exact support or a truncation."""

    lo: np.ndarray
    hi: np.ndarray
    bounded: bool

    def __post_init__(self) -> None:
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape or np.any(hi <= lo):
            raise ValueError("domain must satisfy lo < hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @staticmethod
    def bounded_box(lo, hi) -> "Domain":
        return Domain(np.asarray(lo, float), np.asarray(hi, float), True)

    @staticmethod
    def truncated(lo, hi) -> "Domain":
        return Domain(np.asarray(lo, float), np.asarray(hi, float), False)


def default_domain(model) -> Domain:
    """Computational box for a model: exact support when bounded, 5-sigma truncation else."""
    if isinstance(model, UniformBox):
        return Domain.bounded_box(model.lo, model.hi)
    if isinstance(model, UniformBall):
        return Domain.bounded_box(model.center - model.radius, model.center + model.radius)
    if isinstance(model, TruncatedPowerLaw):
        return Domain.bounded_box(-np.ones(model.dim), np.ones(model.dim))
    if isinstance(model, GridDensity):
        return Domain.bounded_box(model.origin, model.hi)
    if isinstance(model, CylinderSurface):
        lo = np.array([-1.0, -1.0, model.z_lo])
        hi = np.array([1.0, 1.0, model.z_hi])
        return Domain.bounded_box(lo, hi)
    if isinstance(model, GaussianMixture):
        sig = np.sqrt(np.stack([np.diag(c) for c in model.covs]))
        lo = (model.means - 5.0 * sig).min(axis=0)
        hi = (model.means + 5.0 * sig).max(axis=0)
        return Domain.truncated(lo, hi)
    raise ValueError(f"no default domain for {type(model).__name__}")


# -------------------------------- operations --------------------------------

def eval_density(model, x):
    """Density of ``model`` at point(s) ``x``; zero outside the support."""
    return model.density_at(x)


def sample(model, n: int, seed: int) -> np.ndarray:
    """Draw ``n`` seeded points from ``model``; shape (n, dim)."""
    if n < 0:
        raise ValueError(f"sample count must be >= 0, got {n}")
    if n == 0:
        return np.empty((0, model.dim))
    rng = np.random.default_rng(seed)
    return model.sample(n, rng)


def quantile_depth_1d(model, x: float) -> float:
    """min(F(x), 1 - F(x)) for a one-dimensional model.

    Mixtures use the normal CDF; other models integrate the density with
    absolute tolerance 1e-8.
    """
    if model.dim != 1:
        raise ValueError(f"quantile depth requires a 1-D model, got dim {model.dim}")
    if isinstance(model, GaussianMixture):
        left = float(model.marginal_tail_left(np.array([x]))[0])
        return min(left, 1.0 - left)
    if isinstance(model, UniformBox):
        lo, hi = float(model.lo[0]), float(model.hi[0])
        left = np.clip((x - lo) / (hi - lo), 0.0, 1.0)
        return float(min(left, 1.0 - left))
    left, _ = integrate.quad(lambda t: model.density_at(np.array([t])),
                             -np.inf, x, epsabs=_QUAD_ABS_TOL, limit=200)
    return float(min(left, 1.0 - left))


def gaussian_radial_depth(r: float, d: int, phi: PhiSpec) -> float:
    """Radial depth profile of the Gaussian model: integral of phi(G(t)**d) over t >= r.

    G is the standard normal density in one dimension.  For alpha = 1/d the
    profile reduces to the scalar Gaussian tail, with maximum 1/2 at r = 0.
    """
    if r < 0.0:
        raise ValueError(f"radius must be >= 0, got {r}")

    def integrand(t: float) -> float:
        g = math.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)
        return phi.apply(g ** d)

    val, _ = integrate.quad(integrand, r, np.inf, epsabs=_QUAD_ABS_TOL, limit=200)
    return float(val)


def ball_uniform_depth(x, d: int, phi: PhiSpec) -> float:
    """Depth of the uniform unit ball at x: (1 - |x|) * phi(1 / V_d)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape[0] != d:
        raise ValueError(f"point dimension {x.shape[0]} does not match d={d}")
    r = float(np.linalg.norm(x))
    if r > 1.0 + 1e-12:
        raise ValueError(f"point must lie in the closed unit ball, |x|={r:.4g}")
    return (1.0 - min(r, 1.0)) * phi.apply(1.0 / unit_ball_volume(d))


def supersolution_bound(model, x) -> float:
    """Marginal-tail upper bound: the smaller of the two axis-1 line integrals.

    For a point x = (x1, x'), integrates the density in the first coordinate
    over xi < x1 and xi > x1 with x' fixed and returns the minimum.  For
    alpha = 1 this dominates the depth everywhere.
    """
    pts, single = _rows(x, model.dim)
    if isinstance(model, GaussianMixture):
        left = model.marginal_tail_left(pts)
        line = _mixture_line_mass(model, pts)
        out = np.minimum(left, line - left)
    elif isinstance(model, UniformBox):
        lo, hi = model.lo, model.hi
        inside = np.all((pts[:, 1:] >= lo[1:]) & (pts[:, 1:] <= hi[1:]), axis=1) \
            if model.dim > 1 else np.ones(pts.shape[0], dtype=bool)
        left = np.clip(pts[:, 0] - lo[0], 0.0, hi[0] - lo[0]) * model.value
        line = (hi[0] - lo[0]) * model.value
        out = np.where(inside, np.minimum(left, line - left), 0.0)
    elif isinstance(model, GridDensity):
        out = _grid_line_tails(model, pts)
    else:
        out = np.empty(pts.shape[0])
        for i, p in enumerate(pts):
            def rho(t: float) -> float:
                q = p.copy()
                q[0] = t
                return model.density_at(q)
            left, _ = integrate.quad(rho, -np.inf, p[0], epsabs=_QUAD_ABS_TOL, limit=200)
            right, _ = integrate.quad(rho, p[0], np.inf, epsabs=_QUAD_ABS_TOL, limit=200)
            out[i] = min(left, right)
    return float(out[0]) if single else out


def _mixture_line_mass(model: GaussianMixture, pts: np.ndarray) -> np.ndarray:
    """Total mass of the axis-1 line density through each point."""
    if model.dim == 1:
        return np.ones(pts.shape[0])
    out = np.zeros(pts.shape[0])
    for w, m, c in zip(model.weights, model.means, model.covs):
        crr = c[1:, 1:]
        L = np.linalg.cholesky(crr)
        z = np.linalg.solve(L, (pts[:, 1:] - m[1:]).T)
        logdet = 2.0 * np.log(np.diag(L)).sum()
        out += w * np.exp(-0.5 * ((z * z).sum(axis=0) + logdet
                                  + (model.dim - 1) * math.log(2.0 * math.pi)))
    return out


def _grid_line_tails(model: GridDensity, pts: np.ndarray) -> np.ndarray:
    """Exact trapezoid tails of the interpolated grid density along axis 1."""
    n0 = model.values.shape[0]
    h0 = model.spacing[0]
    xs = model.origin[0] + h0 * np.arange(n0)
    out = np.empty(pts.shape[0])
    for i, p in enumerate(pts):
        line_pts = np.tile(p, (n0, 1))
        line_pts[:, 0] = xs
        vals = np.atleast_1d(model.density_at(line_pts))
        cum = np.concatenate(([0.0], np.cumsum((vals[1:] + vals[:-1]) * 0.5 * h0)))
        # interpolant is linear within a cell, so the partial-cell mass is
        # an exact trapezoid between the left node and the query
        j = int(np.clip((p[0] - xs[0]) // h0, 0, n0 - 2))
        frac = np.clip(p[0] - xs[j], 0.0, h0)
        vq = vals[j] + (vals[j + 1] - vals[j]) * frac / h0
        if p[0] <= xs[0]:
            left = 0.0
        elif p[0] >= xs[-1]:
            left = float(cum[-1])
        else:
            left = float(cum[j] + 0.5 * (vals[j] + vq) * frac)
        out[i] = min(left, cum[-1] - left)
    return out


def powerlaw_depth_lower_bound(epsilon: float, d: int) -> float:
    """Depth floor of the truncated power law at the origin for alpha = 1/d."""
    if not (0.0 < epsilon < 1.0):
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return (-math.log(epsilon)) ** (1.0 - 1.0 / d) / sphere_area(d) ** (1.0 / d)


# --------------------------------- config I/O ---------------------------------

def model_to_config(model) -> dict:
    if isinstance(model, GaussianMixture):
        return {"kind": "gaussian_mixture",
                "weights": model.weights.tolist(),
                "means": model.means.tolist(),
                "covs": model.covs.tolist()}
    if isinstance(model, UniformBox):
        return {"kind": "uniform_box", "lo": model.lo.tolist(), "hi": model.hi.tolist()}
    if isinstance(model, UniformBall):
        return {"kind": "uniform_ball", "center": model.center.tolist(),
                "radius": model.radius}
    if isinstance(model, TruncatedPowerLaw):
        return {"kind": "truncated_power_law", "epsilon": model.epsilon, "dim": model.dim}
    if isinstance(model, CylinderSurface):
        return {"kind": "cylinder_surface", "z_pad": model.z_pad}
    if isinstance(model, GridDensity):
        return {"kind": "grid", "dims": list(model.values.shape),
                "origin": model.origin.tolist(), "spacing": model.spacing.tolist(),
                "probability": model.probability}
    raise ValueError(f"unknown density model {type(model).__name__}")


def model_from_config(cfg: dict, base_dir: Path | None = None):
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise ValueError("density config must be an object with a 'kind' field")
    kind = cfg["kind"]
    try:
        if kind == "gaussian_mixture":
            return GaussianMixture(np.asarray(cfg["weights"], float),
                                   np.asarray(cfg["means"], float),
                                   np.asarray(cfg["covs"], float))
        if kind == "uniform_box":
            return UniformBox(np.asarray(cfg["lo"], float), np.asarray(cfg["hi"], float))
        if kind == "uniform_ball":
            return UniformBall(np.asarray(cfg["center"], float), float(cfg["radius"]))
        if kind == "truncated_power_law":
            return TruncatedPowerLaw(float(cfg["epsilon"]), int(cfg["dim"]))
        if kind == "cylinder_surface":
            return CylinderSurface(float(cfg.get("z_pad", 0.05)))
        if kind == "grid":
            dims = [int(v) for v in cfg["dims"]]
            if "csv" in cfg:
                if len(dims) != 2:
                    raise ValueError("csv grid payloads are only defined for 2-D grids")
                path = (base_dir or Path(".")) / cfg["csv"]
                values = np.loadtxt(path, delimiter=",").reshape(dims)
            elif "payload" in cfg:
                path = (base_dir or Path(".")) / cfg["payload"]
                values = np.fromfile(path, dtype="<f8").reshape(dims)
            else:
                raise ValueError("grid config needs a 'payload' (.f64) or 'csv' field")
            return GridDensity(np.asarray(cfg["origin"], float),
                               np.asarray(cfg["spacing"], float),
                               values, bool(cfg.get("probability", False)))
    except KeyError as exc:
        raise ValueError(f"density config for kind '{kind}' is missing field {exc}") from exc
    raise ValueError(f"unknown density kind '{kind}'")


def load_density(path):
    """Load a density model from a JSON config; grid payloads resolve next to it."""
    path = Path(path)
    with open(path) as fh:
        cfg = json.load(fh)
    return model_from_config(cfg, base_dir=path.parent)


def save_density(model, path) -> None:
    """Write the JSON config; grid values go to a sibling little-endian .f64 file."""
    path = Path(path)
    cfg = model_to_config(model)
    if isinstance(model, GridDensity):
        payload = path.with_suffix(".f64")
        model.values.astype("<f8").tofile(payload)
        cfg["payload"] = payload.name
    with open(path, "w") as fh:
        json.dump(cfg, fh, indent=2)
        fh.write("\n")

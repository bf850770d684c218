"""Uniform-grid eikonal solver and depth fields.

The front speed is phi(density) sampled at the nodes of a uniform grid;
``fast_marching`` runs the single-pass monotone solver from ``_fmm`` and
``solve_depth`` wires a density model, a cost profile and a boundary
condition together into a ``DepthField``.  Level sets come out as
polylines, grid maxima are counted with plateau merging, and fields
round-trip through a JSON header plus a little-endian ``.f64`` payload.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from . import _fmm
from .density import (Domain, PhiSpec, default_domain, eval_density,
                      multilinear_interp, supersolution_bound)
from .errors import ConfigError, SolverError

__all__ = [
    "GridSpec",
    "ZeroOnBoxEdge",
    "ZeroOnMask",
    "SupersolutionOnBoxEdge",
    "DepthField",
    "Polyline",
    "make_grid",
    "local_update",
    "fast_marching",
    "solve_depth",
    "level_set",
    "grid_local_maxima",
    "save_field",
    "load_field",
]


@dataclass(frozen=True)
class GridSpec:
    """Uniform node lattice: ``dims`` nodes per axis, shared spacing."""

    dims: tuple
    origin: np.ndarray
    spacing: float

    def __post_init__(self) -> None:
        dims = tuple(int(n) for n in self.dims)
        origin = np.atleast_1d(np.asarray(self.origin, dtype=float))
        if len(dims) != origin.shape[0]:
            raise ConfigError("grid dims and origin disagree on dimension")
        if any(n < 3 for n in dims):
            raise ConfigError(f"grids need at least 3 nodes per axis, got {dims}")
        if not self.spacing > 0.0:
            raise ConfigError(f"grid spacing must be positive, got {self.spacing}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "origin", origin)

    @property
    def dim(self) -> int:
        return len(self.dims)

    @property
    def hi(self) -> np.ndarray:
        return self.origin + self.spacing * (np.array(self.dims) - 1)

    def axis_coords(self, a: int) -> np.ndarray:
        return self.origin[a] + self.spacing * np.arange(self.dims[a])

    def nodes(self) -> np.ndarray:
        """All node positions as an (N, dim) array in C order."""
        axes = [self.axis_coords(a) for a in range(self.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def edge_mask(self) -> np.ndarray:
        mask = np.zeros(self.dims, dtype=bool)
        for a in range(self.dim):
            sl = [slice(None)] * self.dim
            sl[a] = 0
            mask[tuple(sl)] = True
            sl[a] = -1
            mask[tuple(sl)] = True
        return mask


def make_grid(domain: Domain, n: int) -> GridSpec:
    """Grid over ``domain`` with ``n`` nodes along the longest axis.

    Shorter axes get as many nodes as the shared spacing requires to cover
    the box; their extent is rounded up to a whole number of cells.
    """
    if n < 3:
        raise ConfigError(f"need at least 3 nodes, got {n}")
    ext = domain.hi - domain.lo
    h = float(ext.max()) / (n - 1)
    dims = tuple(max(3, int(math.ceil(e / h - 1e-9)) + 1) for e in ext)
    return GridSpec(dims, domain.lo, h)


# ---------------------------- boundary conditions ----------------------------

@dataclass(frozen=True)
class ZeroOnBoxEdge:
    """Depth zero on every outer face node."""


@dataclass(frozen=True)
class ZeroOnMask:
    """Depth zero on an explicit node mask."""

    mask: np.ndarray


@dataclass(frozen=True)
class SupersolutionOnBoxEdge:
    """Outer face nodes pinned to the marginal-tail upper bound of the model."""


def _resolve_bc(bc, grid: GridSpec, model) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(bc, ZeroOnMask):
        mask = np.asarray(bc.mask, dtype=bool)
        if mask.shape != tuple(grid.dims):
            raise ConfigError(f"mask shape {mask.shape} does not match grid {grid.dims}")
        idx = np.flatnonzero(mask.ravel()).astype(np.int64)
        return idx, np.zeros(idx.size)
    if isinstance(bc, ZeroOnBoxEdge):
        idx = np.flatnonzero(grid.edge_mask().ravel()).astype(np.int64)
        return idx, np.zeros(idx.size)
    if isinstance(bc, SupersolutionOnBoxEdge):
        if model is None:
            raise ConfigError("supersolution boundary values need a density model")
        mask = grid.edge_mask().ravel()
        idx = np.flatnonzero(mask).astype(np.int64)
        pts = grid.nodes()[idx]
        vals = np.atleast_1d(supersolution_bound(model, pts))
        return idx, vals
    raise ConfigError(f"unknown boundary condition {bc!r}")


# ------------------------------- depth fields -------------------------------

@dataclass
class DepthField:
    """Solved depth values on a grid, plus the fixed-node mask."""

    grid: GridSpec
    values: np.ndarray
    fixed_mask: np.ndarray | None = None

    def depth_at(self, x):
        """Multilinear interpolation; raises outside the grid hull."""
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        t = (pts - self.grid.origin) / self.grid.spacing
        if np.any(t < -1e-9) or np.any(t > np.array(self.grid.dims) - 1 + 1e-9):
            raise ConfigError("query point outside the grid hull")
        out = multilinear_interp(self.grid.origin, self.grid.spacing, self.values, x)
        return out

    def level_set(self, c: float) -> list["Polyline"]:
        return level_set(self, c)

    def local_maxima(self, margin: float = 1e-9) -> np.ndarray:
        return grid_local_maxima(self.values, margin)


@dataclass(frozen=True)
class Polyline:
    """Level-set component: ordered vertices, closed when a loop."""

    points: np.ndarray
    closed: bool


# --------------------------------- operations ---------------------------------

def local_update(axis_values, f: float, h: float) -> float:
    """Monotone one-node update from per-axis upwind values.

    ``axis_values`` holds the smaller accepted neighbor value per axis
    (``None``/``inf`` for axes with no accepted neighbor).  Returns the
    largest u with sum over participating axes of (u - a)^2 = (h f)^2.
    """
    if not f >= 0.0 or not math.isfinite(f):
        raise SolverError(f"speed must be finite and >= 0, got {f}")
    if not h > 0.0:
        raise ConfigError(f"spacing must be positive, got {h}")
    vals = [float(v) for v in axis_values if v is not None and math.isfinite(v)]
    if not vals:
        raise SolverError("local update needs at least one finite axis value")
    buf = np.sort(np.asarray(vals, dtype=float))
    return float(_fmm.godunov_update(buf, buf.size, h * f))


def fast_marching(speed: np.ndarray, spacing: float, fixed_mask: np.ndarray,
                  fixed_values: np.ndarray | None = None,
                  return_order: bool = False):
    """Single-pass solve of |grad u| = speed with fixed Dirichlet nodes.

    ``speed`` is the node array, ``fixed_mask`` marks pinned nodes and
    ``fixed_values`` their values (zero when omitted).  With
    ``return_order`` also returns the acceptance order and the accepted
    values in pop order (nondecreasing by construction).
    """
    speed = np.asarray(speed, dtype=float)
    if np.any(np.isnan(speed)):
        raise SolverError("speed field contains NaN")
    if np.any(speed < 0.0):
        raise SolverError("speed field must be nonnegative")
    mask = np.asarray(fixed_mask, dtype=bool)
    if mask.shape != speed.shape:
        raise ConfigError("fixed mask shape does not match the speed field")
    idx = np.flatnonzero(mask.ravel()).astype(np.int64)
    if idx.size == 0:
        raise SolverError("fast marching needs a nonempty boundary set")
    if fixed_values is None:
        vals = np.zeros(idx.size)
    else:
        fv = np.asarray(fixed_values, dtype=float)
        vals = fv.ravel()[idx] if fv.shape == speed.shape else fv.astype(float)
        if vals.size != idx.size or np.any(~np.isfinite(vals)) or np.any(vals < 0.0):
            raise ConfigError("fixed values must be finite, nonnegative, one per fixed node")
    dims = np.asarray(speed.shape, dtype=np.int64)
    u, order, order_vals = _fmm.grid_fast_march(dims, float(spacing),
                                                speed.ravel(), idx, vals)
    values = u.reshape(speed.shape)
    if return_order:
        return values, order, order_vals
    return values


def solve_depth(model, phi: PhiSpec, n: int = 257, grid: GridSpec | None = None,
                bc=None) -> DepthField:
    """Depth field of a density model: solve |grad u| = phi(rho) on a grid.

    The grid defaults to the model's computational box with ``n`` nodes on
    the longest axis; the boundary condition defaults to zero on the box
    edge.
    """
    if grid is None:
        grid = make_grid(default_domain(model), n)
    if bc is None:
        bc = ZeroOnBoxEdge()
    speed = np.asarray(phi.apply(eval_density(model, grid.nodes())),
                       dtype=float).reshape(grid.dims)
    idx, vals = _resolve_bc(bc, grid, model)
    dims = np.asarray(grid.dims, dtype=np.int64)
    u, _, _ = _fmm.grid_fast_march(dims, grid.spacing, speed.ravel(), idx, vals)
    mask = np.zeros(int(np.prod(grid.dims)), dtype=bool)
    mask[idx] = True
    return DepthField(grid, u.reshape(grid.dims), mask.reshape(grid.dims))


def level_set(field: DepthField, c: float) -> list[Polyline]:
    """Extract the level-c curves of a 2-D field as world-coordinate polylines."""
    if field.grid.dim != 2:
        raise ConfigError("level-set extraction is defined for 2-D fields")
    finite = field.values[np.isfinite(field.values)]
    vmax = float(finite.max()) if finite.size else 0.0
    if c <= 0.0 or c > vmax:
        raise ConfigError(f"level {c} outside the field range (0, {vmax:.6g}]")
    from skimage import measure

    work = np.where(np.isfinite(field.values), field.values, vmax + 1.0)
    out = []
    for arr in measure.find_contours(work, c):
        closed = bool(np.allclose(arr[0], arr[-1]))
        pts = field.grid.origin + arr * field.grid.spacing
        out.append(Polyline(pts, closed))
    return out


def grid_local_maxima(values: np.ndarray, margin: float = 1e-9) -> np.ndarray:
    """Flat indices of one representative per local-maximum plateau.

    A node survives when no neighbor (full stencil, diagonals included)
    exceeds it by ``margin`` or more; surviving nodes within ``margin`` of
    each other merge, and each component reports its lowest flat index.
    """
    v = np.asarray(values, dtype=float)
    d = v.ndim
    padded = np.pad(v, 1, constant_values=-np.inf)
    dominated = np.zeros(v.shape, dtype=bool)
    center = tuple(slice(1, 1 + s) for s in v.shape)
    for off in np.ndindex(*(3,) * d):
        if all(o == 1 for o in off):
            continue
        sl = tuple(slice(o, o + s) for o, s in zip(off, v.shape))
        dominated |= padded[sl] >= v + margin
    cand = ~dominated & np.isfinite(v)
    labels, n_lab = ndimage.label(cand, structure=np.ones((3,) * d, dtype=int))
    flat = labels.ravel()
    reps = []
    for lab in range(1, n_lab + 1):
        reps.append(int(np.flatnonzero(flat == lab)[0]))
    return np.asarray(sorted(reps), dtype=np.int64)


# ---------------------------------- file I/O ----------------------------------

def save_field(field: DepthField, path) -> None:
    """JSON header {dims, origin, spacing} + sibling little-endian .f64 payload."""
    path = Path(path)
    payload = path.with_suffix(".f64")
    field.values.astype("<f8").tofile(payload)
    header = {"dims": list(field.grid.dims),
              "origin": field.grid.origin.tolist(),
              "spacing": field.grid.spacing,
              "payload": payload.name}
    with open(path, "w") as fh:
        json.dump(header, fh, indent=2)
        fh.write("\n")


def load_field(path) -> DepthField:
    path = Path(path)
    with open(path) as fh:
        header = json.load(fh)
    try:
        dims = tuple(int(v) for v in header["dims"])
        origin = np.asarray(header["origin"], dtype=float)
        spacing = float(header["spacing"])
        payload = path.parent / header.get("payload", path.with_suffix(".f64").name)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed field header in {path}: {exc}") from exc
    values = np.fromfile(payload, dtype="<f8")
    if values.size != int(np.prod(dims)):
        raise ConfigError(f"payload size {values.size} does not match dims {dims}")
    return DepthField(GridSpec(dims, origin, spacing), values.reshape(dims))

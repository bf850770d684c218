"""Depth on weighted graphs and sampled point clouds.

Two solvers share the ``WeightedGraph`` container.  ``path_depth`` is the
metric route: multi-source Dijkstra where an edge costs its weight times
the mean of the endpoint densities.  ``pointcloud_eikonal`` is the
difference-scheme route: the nonlocal analogue of |grad u| = rho with
kernel weights, swept once in fast-marching order and then verified by a
few Gauss-Seidel passes.  Graph builders cover exact k-nearest-neighbor
graphs (unit or exponential weights) and epsilon-kernel graphs with the
second-moment normalization that makes the scheme consistent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.spatial import cKDTree

from . import _fmm
from .density import sphere_area
from .errors import ConfigError, SolverError

__all__ = [
    "WeightedGraph",
    "GraphDepth",
    "KernelSpec",
    "graph_from_edges",
    "build_knn_graph",
    "build_kernel_graph",
    "sigma_normalization",
    "path_depth",
    "pointcloud_eikonal",
    "graph_local_update",
    "scheme_residuals",
    "local_maxima",
    "save_points",
    "load_points",
    "save_graph",
    "load_graph",
    "save_depth_csv",
]


@dataclass
class WeightedGraph:
    """Symmetric weighted graph in CSR form, with optional geometry attached."""

    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    positions: np.ndarray | None = None
    node_density: np.ndarray | None = None
    boundary: np.ndarray | None = None  # bool mask over nodes
    isolated: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))
    kernel: "KernelSpec | None" = None

    @property
    def n(self) -> int:
        return self.indptr.size - 1

    def degree(self) -> np.ndarray:
        return np.diff(self.indptr)


@dataclass
class GraphDepth:
    """Per-node depth values; unreachable nodes carry +inf and reached=False."""

    values: np.ndarray
    reached: np.ndarray


@dataclass(frozen=True)
class KernelSpec:
    """Radial kernel eta(|x|/h) with its consistency normalization sigma."""

    eta: str
    h: float
    dim: int
    sigma: float = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.eta not in ("indicator", "gaussian4"):
            raise ConfigError(f"unknown kernel profile '{self.eta}'")
        if not self.h > 0.0:
            raise ConfigError(f"bandwidth must be positive, got {self.h}")
        if self.dim < 1:
            raise ConfigError(f"dimension must be >= 1, got {self.dim}")
        if self.sigma is None:
            object.__setattr__(self, "sigma", sigma_normalization(self.eta, self.dim))

    def eta_at(self, t):
        t = np.asarray(t, dtype=float)
        if self.eta == "indicator":
            return (t <= 1.0).astype(float)
        return np.where(t <= 1.0, np.exp(-4.0 * t * t), 0.0)


def sigma_normalization(eta: str, d: int) -> float:
    """Constant sigma with (sigma/2) * integral of eta(|x|) x_1^2 dx = 1.

    For radial eta the integral reduces to the surface area of S^{d-1}
    times the (d+1)-th radial moment over d.
    """
    if d < 1:
        raise ConfigError(f"dimension must be >= 1, got {d}")
    if eta == "indicator":
        moment = 1.0 / (d + 2.0)
    elif eta == "gaussian4":
        moment, _ = integrate.quad(lambda r: math.exp(-4.0 * r * r) * r ** (d + 1),
                                   0.0, 1.0, epsabs=1e-12)
    else:
        raise ConfigError(f"unknown kernel profile '{eta}'")
    integral = sphere_area(d) / d * moment
    return 2.0 / integral


# ------------------------------ graph builders ------------------------------

def _csr_from_pairs(n: int, i: np.ndarray, j: np.ndarray, w: np.ndarray):
    """Symmetric CSR from directed pairs; duplicate directed edges keep the max."""
    ii = np.concatenate([i, j])
    jj = np.concatenate([j, i])
    ww = np.concatenate([w, w])
    key = ii.astype(np.int64) * n + jj
    order = np.argsort(key, kind="stable")
    key, ii, jj, ww = key[order], ii[order], jj[order], ww[order]
    if key.size:
        first = np.concatenate(([True], key[1:] != key[:-1]))
        group = np.cumsum(first) - 1
        wmax = np.full(int(group[-1]) + 1, -np.inf)
        np.maximum.at(wmax, group, ww)
        ii, jj, ww = ii[first], jj[first], wmax
    counts = np.bincount(ii, minlength=n)
    indptr = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
    return indptr, jj.astype(np.int64), ww.astype(float)


def graph_from_edges(n: int, i, j, w, positions=None, node_density=None,
                     boundary=None) -> WeightedGraph:
    """Graph from an undirected edge list (each pair listed once or twice)."""
    i = np.asarray(i, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    w = np.asarray(w, dtype=float)
    if not (i.size == j.size == w.size):
        raise ConfigError("edge arrays must have equal length")
    if i.size and (i.min() < 0 or j.min() < 0 or max(i.max(), j.max()) >= n):
        raise ConfigError("edge endpoints out of range")
    if np.any(i == j):
        raise ConfigError("self loops are not allowed")
    if np.any(w < 0.0) or np.any(~np.isfinite(w)):
        raise ConfigError("edge weights must be finite and nonnegative")
    indptr, indices, weights = _csr_from_pairs(n, i, j, w)
    isolated = np.flatnonzero(np.diff(indptr) == 0).astype(np.int64)
    return WeightedGraph(indptr, indices, weights, positions=positions,
                         node_density=node_density, boundary=boundary,
                         isolated=isolated)


def build_knn_graph(points: np.ndarray, k: int,
                    weight_rule: str = "unit") -> WeightedGraph:
    """Exact k-nearest-neighbor graph, union over directions.

    ``unit`` puts weight 1 on every edge; ``mnist_exp`` uses
    exp(-4 |x_i - x_j|^2 / d_k(x_i)^2) with d_k the distance to the k-th
    neighbor of the source, symmetrized by the larger direction.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] < 2:
        raise ConfigError("need at least two points in an (n, d) array")
    n = points.shape[0]
    if not 1 <= k < n:
        raise ConfigError(f"k must be in [1, {n - 1}], got {k}")
    if weight_rule not in ("unit", "mnist_exp"):
        raise ConfigError(f"unknown weight rule '{weight_rule}'")
    tree = cKDTree(points)
    dist, nbr = tree.query(points, k=k + 1)
    dist, nbr = dist[:, 1:], nbr[:, 1:]  # drop self
    d_k = dist[:, -1]
    if np.any(d_k == 0.0):
        raise ConfigError("duplicate points make the k-NN scale degenerate")
    src = np.repeat(np.arange(n, dtype=np.int64), k)
    dst = nbr.ravel().astype(np.int64)
    if weight_rule == "unit":
        w = np.ones(src.size)
    else:
        w = np.exp(-4.0 * dist.ravel() ** 2 / d_k[src] ** 2)
    indptr, indices, weights = _csr_from_pairs(n, src, dst, w)
    isolated = np.flatnonzero(np.diff(indptr) == 0).astype(np.int64)
    return WeightedGraph(indptr, indices, weights, positions=points,
                         isolated=isolated)


def build_kernel_graph(points: np.ndarray, kernel: KernelSpec,
                       n_norm: int | None = None) -> WeightedGraph:
    """Epsilon graph with weights sigma * n^-1 * h^-d * eta(|x_i - x_j| / h).

    Edges exist exactly where eta is positive (pair distance at most h).
    Nodes without any neighbor are listed in ``isolated`` and left in the
    graph; solvers simply never reach them.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] < 2:
        raise ConfigError("need at least two points in an (n, d) array")
    n = points.shape[0]
    n_norm = n if n_norm is None else int(n_norm)
    tree = cKDTree(points)
    pairs = tree.query_pairs(r=kernel.h, output_type="ndarray")
    if pairs.size:
        d = np.linalg.norm(points[pairs[:, 0]] - points[pairs[:, 1]], axis=1)
        scale = kernel.sigma / (n_norm * kernel.h ** kernel.dim)
        w = scale * kernel.eta_at(d / kernel.h)
        keep = w > 0.0
        pairs, w = pairs[keep], w[keep]
    else:
        pairs = np.empty((0, 2), dtype=np.int64)
        w = np.empty(0)
    indptr, indices, weights = _csr_from_pairs(
        n, pairs[:, 0].astype(np.int64), pairs[:, 1].astype(np.int64), w)
    isolated = np.flatnonzero(np.diff(indptr) == 0).astype(np.int64)
    return WeightedGraph(indptr, indices, weights, positions=points,
                         isolated=isolated, kernel=kernel)


# --------------------------------- solvers ---------------------------------

def _solver_inputs(graph: WeightedGraph, rho, boundary):
    rho = graph.node_density if rho is None else np.asarray(rho, dtype=float)
    if rho is None:
        raise ConfigError("no node density given and none stored on the graph")
    rho = np.broadcast_to(rho, (graph.n,)).astype(float)
    if np.any(np.isnan(rho)):
        raise SolverError("node density contains NaN")
    if np.any(rho < 0.0):
        raise ConfigError("node density must be nonnegative")
    boundary = graph.boundary if boundary is None else boundary
    if boundary is None:
        raise ConfigError("no boundary set given and none stored on the graph")
    bmask = np.zeros(graph.n, dtype=bool)
    bidx = np.asarray(boundary)
    if bidx.dtype == bool:
        bmask = bidx.astype(bool)
    else:
        bmask[bidx.astype(np.int64)] = True
    if not bmask.any():
        raise SolverError("boundary set is empty")
    return rho, bmask


def path_depth(graph: WeightedGraph, rho=None, boundary=None) -> GraphDepth:
    """Cheapest-route depth: multi-source Dijkstra from the boundary set.

    Each directed edge costs w_ij * (rho_i + rho_j) / 2; the depth of a node
    is the exact minimum cost of a path into the boundary.  Disconnected
    nodes stay at +inf with reached=False.
    """
    rho, bmask = _solver_inputs(graph, rho, boundary)
    cost = graph.weights * 0.5 * (rho[_csr_rows(graph)] + rho[graph.indices])
    dist = _fmm.graph_dijkstra(graph.indptr, graph.indices, cost,
                               np.flatnonzero(bmask).astype(np.int64))
    return GraphDepth(dist, np.isfinite(dist))


def _csr_rows(graph: WeightedGraph) -> np.ndarray:
    return np.repeat(np.arange(graph.n, dtype=np.int64), graph.degree())


def pointcloud_eikonal(graph: WeightedGraph, h: float | None = None, rho=None,
                       boundary=None, max_sweeps: int = 5) -> GraphDepth:
    """Difference-scheme depth: rho_i^2 = sum_j w_ij h^-2 max(0, u_i - u_j)^2.

    One fast-marching pass orders the nodes, then up to ``max_sweeps``
    Gauss-Seidel sweeps re-solve every free node against its final
    neighborhood (heterogeneous weights can bend strict causality).
    Boundary nodes stay at zero.
    """
    if h is None:
        if graph.kernel is None:
            raise ConfigError("no bandwidth given and none stored on the graph")
        h = graph.kernel.h
    if not h > 0.0:
        raise ConfigError(f"bandwidth must be positive, got {h}")
    rho, bmask = _solver_inputs(graph, rho, boundary)
    coef = graph.weights / (h * h)
    rho2 = rho * rho
    fixed = np.flatnonzero(bmask).astype(np.int64)
    u, _, _ = _fmm.graph_fast_march(graph.indptr, graph.indices, coef, rho2, fixed)
    _fmm.graph_gauss_seidel(graph.indptr, graph.indices, coef, rho2, u,
                            bmask, max_sweeps, 1e-12)
    return GraphDepth(u, np.isfinite(u))


def scheme_residuals(graph: WeightedGraph, depth: GraphDepth, h: float,
                     rho, boundary=None) -> np.ndarray:
    """Per-node |g_i(u) - rho_i^2| of the difference scheme at the final values."""
    rho, bmask = _solver_inputs(graph, rho, boundary)
    coef = graph.weights / (h * h)
    return _fmm.scheme_residuals(graph.indptr, graph.indices, coef, rho * rho,
                                 depth.values, bmask)


def graph_local_update(neighbor_values, weights, h: float, rho: float) -> float:
    """One-node scheme solve: largest u with sum_j w_j h^-2 (u - u_j)_+^2 = rho^2."""
    vals = np.asarray(neighbor_values, dtype=float).copy()
    w = np.asarray(weights, dtype=float).copy()
    if vals.size != w.size or vals.size == 0:
        raise ConfigError("need matching, nonempty neighbor values and weights")
    if not h > 0.0 or not rho >= 0.0:
        raise ConfigError("need h > 0 and rho >= 0")
    out = _fmm.graph_local_solve(vals, w / (h * h), vals.size, rho * rho)
    return float(out)


def local_maxima(graph: WeightedGraph, depth: GraphDepth,
                 margin: float = 1e-9) -> np.ndarray:
    """One representative node per local-maximum plateau of the depth values.

    A node survives when no neighbor exceeds it by ``margin`` or more;
    adjacent survivors (necessarily within ``margin`` of each other) merge
    into a plateau reported by its lowest node index.  Depth 0 marks the
    boundary set, so zero-depth nodes never count: without this, any
    boundary fragment disconnected from the bulk would surface as a
    spurious plateau.
    """
    v = depth.values
    keep = np.isfinite(v) & (v > 0.0)
    rows = _csr_rows(graph)
    dominating = v[graph.indices] >= v[rows] + margin
    dom_nodes = np.unique(rows[dominating & np.isfinite(v[graph.indices])])
    cand = keep.copy()
    cand[dom_nodes] = False
    # also dominated by an unreachable (infinitely deep) neighbor
    inf_nb = np.unique(rows[~np.isfinite(v[graph.indices])])
    cand[inf_nb] = False
    reps = []
    seen = np.zeros(graph.n, dtype=bool)
    for start in np.flatnonzero(cand):
        if seen[start]:
            continue
        comp_min = start
        stack = [start]
        seen[start] = True
        while stack:
            i = stack.pop()
            for e in range(graph.indptr[i], graph.indptr[i + 1]):
                j = int(graph.indices[e])
                if cand[j] and not seen[j]:
                    seen[j] = True
                    stack.append(j)
        reps.append(int(comp_min))
    return np.asarray(sorted(reps), dtype=np.int64)


# --------------------------------- CSV I/O ---------------------------------

def save_points(path, points: np.ndarray, labels=None) -> None:
    points = np.asarray(points, dtype=float)
    cols = [f"x{a}" for a in range(points.shape[1])]
    if labels is not None:
        cols.append("label")
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for i in range(points.shape[0]):
            row = ",".join("%.12g" % v for v in points[i])
            if labels is not None:
                row += f",{labels[i]}"
            fh.write(row + "\n")


def load_points(path):
    """Read a points CSV; returns (points, labels or None)."""
    with open(path) as fh:
        header = fh.readline().strip()
        names = [s.strip() for s in header.split(",")]
        has_label = names and names[-1] == "label"
        ncoord = len(names) - (1 if has_label else 0)
        if ncoord < 1 or any(not n.startswith("x") for n in names[:ncoord]):
            raise ConfigError(f"malformed points header: {header!r}")
        pts, labels = [], []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(names):
                raise ConfigError(f"row width does not match header: {line!r}")
            pts.append([float(v) for v in parts[:ncoord]])
            if has_label:
                labels.append(parts[-1])
    if not pts:
        raise ConfigError("points file has no rows")
    points = np.asarray(pts, dtype=float)
    return points, (np.asarray(labels) if has_label else None)


def save_graph(edges_path, nodes_path, graph: WeightedGraph, rho=None,
               boundary=None) -> None:
    """Edge list i,j,w (each undirected pair once) + node table i,rho,is_boundary."""
    rho, bmask = _solver_inputs(graph, rho, boundary)
    rows = _csr_rows(graph)
    keep = rows < graph.indices
    with open(edges_path, "w") as fh:
        fh.write("i,j,w\n")
        for i, j, w in zip(rows[keep], graph.indices[keep], graph.weights[keep]):
            fh.write("%d,%d,%.12g\n" % (i, j, w))
    with open(nodes_path, "w") as fh:
        fh.write("i,rho,is_boundary\n")
        for i in range(graph.n):
            fh.write("%d,%.12g,%d\n" % (i, rho[i], int(bmask[i])))


def load_graph(edges_path, nodes_path) -> WeightedGraph:
    edges = np.loadtxt(edges_path, delimiter=",", skiprows=1, ndmin=2)
    nodes = np.loadtxt(nodes_path, delimiter=",", skiprows=1, ndmin=2)
    if nodes.shape[1] != 3:
        raise ConfigError("node table must have columns i,rho,is_boundary")
    n = nodes.shape[0]
    order = np.argsort(nodes[:, 0])
    nodes = nodes[order]
    if not np.array_equal(nodes[:, 0], np.arange(n)):
        raise ConfigError("node table must index nodes 0..n-1")
    if edges.size == 0:
        i = j = np.empty(0, dtype=np.int64)
        w = np.empty(0)
    else:
        if edges.shape[1] != 3:
            raise ConfigError("edge list must have columns i,j,w")
        i, j, w = edges[:, 0].astype(np.int64), edges[:, 1].astype(np.int64), edges[:, 2]
    return graph_from_edges(n, i, j, w, node_density=nodes[:, 1],
                            boundary=nodes[:, 2].astype(bool))


def save_depth_csv(path, depth: GraphDepth) -> None:
    """Per-node depth table i,depth,reached; unreachable depths print as inf."""
    with open(path, "w") as fh:
        fh.write("i,depth,reached\n")
        for i, (v, r) in enumerate(zip(depth.values, depth.reached)):
            fh.write("%d,%s,%d\n" % (i, ("%.12g" % v) if np.isfinite(v) else "inf",
                                     int(r)))

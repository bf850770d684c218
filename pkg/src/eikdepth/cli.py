"""Command-line entry points.

Subcommands: grid-solve (density to grid depth field), graph-solve
(point cloud to node depths), labeled-depth (per-class depth over a
labeled cloud), sample, whiten, and report (named property checks as
JSON lines).  Exit codes: 0 success (and all checks passing for
``report``), 1 failed checks, 2 configuration errors, 3 solver errors.
Outputs are staged in a temporary directory and renamed into place so
failures leave no partial files; identical inputs and seeds produce
byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import os
import shutil
import sys
import tempfile
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import analysis
from . import density as dens
from . import graphs
from . import gridsolve
from .errors import ConfigError, SolverError


def _fmt(x: float) -> float:
    """Round-trip through 12 significant digits for stable JSON output."""
    return float("%.12g" % float(x))


@contextmanager
def _staged(out_dir: str):
    """Stage output files in a temp dir; publish them only on success."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=".stage-", dir=out))
    try:
        yield tmp
        for f in sorted(tmp.iterdir()):
            os.replace(f, out / f.name)
    finally:
        shutil.rmtree(tmp, ignore_errors=True)


def _say(args, message: str) -> None:
    if not args.quiet:
        print(message)


# ------------------------------- grid-solve --------------------------------

def cmd_grid_solve(args) -> int:
    model = dens.load_density(args.density)
    phi = dens.PhiSpec(args.alpha)
    bc = (gridsolve.SupersolutionOnBoxEdge() if args.bc == "supersolution"
          else gridsolve.ZeroOnBoxEdge())
    field = gridsolve.solve_depth(model, phi, n=args.n, bc=bc)
    levels = []
    if args.contours:
        levels = [float(s) for s in args.contours.split(",") if s]
    with _staged(args.out_dir) as tmp:
        gridsolve.save_field(field, tmp / "depth_field.json")
        if levels:
            pid = 0
            with open(tmp / "contours.csv", "w") as fh:
                fh.write("level,polyline_id,x,y\n")
                for c in levels:
                    for line in field.level_set(c):
                        for x, y in line.points:
                            fh.write("%.12g,%d,%.12g,%.12g\n" % (c, pid, x, y))
                        pid += 1
    finite = field.values[np.isfinite(field.values)]
    _say(args, json.dumps({
        "max_depth": _fmt(finite.max()),
        "grid_dims": [int(d) for d in field.grid.dims],
        "spacing": _fmt(field.grid.spacing),
        "contour_levels": len(levels),
    }))
    return 0


# ------------------------------- graph-solve -------------------------------

def _resolve_boundary(args, points: np.ndarray) -> np.ndarray:
    if args.boundary_file is not None:
        idx = np.loadtxt(args.boundary_file, dtype=np.int64, ndmin=1)
        if idx.size and (idx.min() < 0 or idx.max() >= points.shape[0]):
            raise ConfigError("boundary node index out of range")
        mask = np.zeros(points.shape[0], dtype=bool)
        mask[idx] = True
        return mask
    if args.boundary_band is not None:
        band = float(args.boundary_band)
        if args.boundary_box is not None:
            flat = [float(s) for s in args.boundary_box.split(",")]
            d = points.shape[1]
            if len(flat) != 2 * d:
                raise ConfigError("--boundary-box needs lo then hi, "
                                  f"{2 * d} numbers for {d}-D points")
            lo, hi = np.asarray(flat[:d]), np.asarray(flat[d:])
        else:
            lo, hi = points.min(axis=0), points.max(axis=0)
        axes = (range(points.shape[1]) if args.boundary_axis is None
                else [args.boundary_axis])
        mask = np.zeros(points.shape[0], dtype=bool)
        for a in axes:
            # absolute wall distance: points beyond the box are not "near" it
            mask |= (np.abs(points[:, a] - lo[a]) <= band) \
                | (np.abs(hi[a] - points[:, a]) <= band)
        return mask
    raise ConfigError("need --boundary-file or --boundary-band")


def _build_graph(args, points: np.ndarray) -> graphs.WeightedGraph:
    if args.graph == "kernel":
        if args.h is None:
            raise ConfigError("kernel graph needs --h")
        ker = graphs.KernelSpec(args.eta, h=args.h, dim=points.shape[1])
        return graphs.build_kernel_graph(points, ker)
    return graphs.build_knn_graph(points, args.k, args.weights)


def cmd_graph_solve(args) -> int:
    points, _ = graphs.load_points(args.points)
    bmask = _resolve_boundary(args, points)
    if args.density is not None:
        model = dens.load_density(args.density)
        rho = dens.eval_density(model, points)
    else:
        rho = np.full(points.shape[0], args.rho)
    graph = _build_graph(args, points)
    if args.solver == "path":
        depth = graphs.path_depth(graph, rho=rho, boundary=bmask)
    else:
        if args.h is None:
            raise ConfigError("difference scheme needs --h")
        depth = graphs.pointcloud_eikonal(graph, h=args.h, rho=rho,
                                          boundary=bmask)
    maxima = graphs.local_maxima(graph, depth)
    finite = depth.values[np.isfinite(depth.values)]
    summary = {
        "n_nodes": int(graph.n),
        "n_boundary": int(bmask.sum()),
        "n_reached": int(depth.reached.sum()),
        "n_isolated": int(graph.isolated.size),
        "max_depth": _fmt(finite.max()) if finite.size else 0.0,
        "n_local_maxima": int(maxima.size),
        "solver": args.solver,
    }
    with _staged(args.out_dir) as tmp:
        graphs.save_depth_csv(tmp / "depth.csv", depth)
        with open(tmp / "summary.json", "w") as fh:
            fh.write(json.dumps(summary) + "\n")
    _say(args, json.dumps(summary))
    return 0


# ------------------------------ labeled-depth ------------------------------

def cmd_labeled_depth(args) -> int:
    points, labels = graphs.load_points(args.points)
    if labels is None:
        raise ConfigError("labeled-depth needs a label column")
    target = labels == args.target
    if not target.any():
        raise ConfigError(f"target label {args.target!r} not present")
    if target.all():
        raise ConfigError("every point has the target label; boundary is empty")
    graph = graphs.build_knn_graph(points, args.k, "mnist_exp")
    rho = np.ones(points.shape[0])
    boundary = ~target
    if args.scheme == "difference":
        if args.h is None:
            raise ConfigError("difference scheme needs --h")
        depth = graphs.pointcloud_eikonal(graph, h=args.h, rho=rho,
                                          boundary=boundary)
    else:
        depth = graphs.path_depth(graph, rho=rho, boundary=boundary)
    tidx = np.flatnonzero(target)
    order = np.argsort(-depth.values[tidx], kind="stable")
    tidx = tidx[order]
    with _staged(args.out_dir) as tmp:
        with open(tmp / "target_depth.csv", "w") as fh:
            fh.write("i,depth,reached\n")
            for i in tidx:
                v = depth.values[i]
                fh.write("%d,%s,%d\n" % (i, ("%.12g" % v) if np.isfinite(v)
                                         else "inf", int(depth.reached[i])))
    deepest = int(tidx[0])
    reached_max = bool(np.isfinite(depth.values[deepest]))
    _say(args, json.dumps({
        "n_target": int(target.sum()),
        "n_boundary": int(boundary.sum()),
        "deepest_node": deepest,
        "max_depth": _fmt(depth.values[deepest]) if reached_max else None,
    }))
    return 0


# ------------------------------ sample / whiten ----------------------------

def cmd_sample(args) -> int:
    model = dens.load_density(args.density)
    pts = dens.sample(model, args.n, args.seed)
    with _staged(args.out_dir) as tmp:
        graphs.save_points(tmp / "points.csv", pts)
    _say(args, json.dumps({"n": int(pts.shape[0]),
                           "dim": int(pts.shape[1]) if pts.size else 0}))
    return 0


def cmd_whiten(args) -> int:
    points, labels = graphs.load_points(args.points)
    tr = analysis.fit_scatter(points)
    white = analysis.whiten(tr, points)
    with _staged(args.out_dir) as tmp:
        graphs.save_points(tmp / "whitened.csv", white, labels)
        with open(tmp / "transform.json", "w") as fh:
            fh.write(json.dumps({
                "location": [_fmt(v) for v in tr.location],
                "scatter": [[_fmt(v) for v in row] for row in tr.scatter],
            }) + "\n")
    _say(args, json.dumps({"n": int(points.shape[0]),
                           "dim": int(points.shape[1])}))
    return 0


# --------------------------------- report ----------------------------------

def cmd_report(args) -> int:
    name = args.check
    if name == "comparison":
        reports = analysis.check_comparison(n=args.n or 65, pairs=args.pairs,
                                            seed=args.seed)
    elif name == "scaling":
        reports = analysis.check_scaling(alpha=args.alpha, a=args.a,
                                         n=args.n or 129)
    elif name == "rigid":
        reports = analysis.check_rigid(n=args.n or 65, seed=args.seed)
    elif name == "sandwich":
        reports = analysis.check_sandwich(epsilon=args.eps, n=args.n or 129)
    elif name == "stability":
        reports = analysis.check_stability(n=args.n or 65, pairs=args.pairs,
                                           seed=args.seed)
    elif name == "modes":
        reports = analysis.check_modes(sep_sigmas=args.sep, n=args.n or 257)
    elif name == "supersolution":
        reports = analysis.check_supersolution(which=args.which,
                                               n=args.n or 201)
    else:  # unreachable behind argparse choices
        raise ConfigError(f"unknown check {name!r}")
    with _staged(args.out_dir) as tmp:
        with open(tmp / "report.jsonl", "w") as fh:
            ok = analysis.write_reports(fh, reports)
    for rep in reports:
        print(analysis.report_line(rep))
    return 0 if ok else 1


# --------------------------------- parser ----------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eikdepth",
        description="Density-weighted eikonal depth on grids and graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out-dir", default=".")
        p.add_argument("--quiet", action="store_true")

    p = sub.add_parser("grid-solve", help="solve a density config on a grid")
    common(p)
    p.add_argument("--density", required=True, help="density config JSON")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--n", type=int, default=257,
                   help="nodes along the longest axis")
    p.add_argument("--bc", choices=["edge-zero", "supersolution"],
                   default="edge-zero")
    p.add_argument("--contours", default="",
                   help="comma-separated level values")
    p.set_defaults(func=cmd_grid_solve)

    p = sub.add_parser("graph-solve", help="solve depth on a point cloud")
    common(p)
    p.add_argument("--points", required=True, help="points CSV")
    p.add_argument("--graph", choices=["kernel", "knn"], default="kernel")
    p.add_argument("--eta", choices=["indicator", "gaussian4"],
                   default="indicator")
    p.add_argument("--h", type=float, default=None, help="kernel bandwidth")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--weights", choices=["unit", "mnist_exp"], default="unit")
    p.add_argument("--solver", choices=["scheme", "path"], default="scheme")
    p.add_argument("--rho", type=float, default=1.0,
                   help="constant node density")
    p.add_argument("--density", default=None,
                   help="density config evaluated at the nodes")
    p.add_argument("--boundary-file", default=None,
                   help="file of boundary node indices")
    p.add_argument("--boundary-band", type=float, default=None,
                   help="band width from the bounding box")
    p.add_argument("--boundary-axis", type=int, default=None,
                   help="restrict the band to one axis")
    p.add_argument("--boundary-box", default=None,
                   help="band reference box lo0,..,hi0,.. "
                        "(default: data bounding box)")
    p.set_defaults(func=cmd_graph_solve)

    p = sub.add_parser("labeled-depth",
                       help="depth of one label class against the rest")
    common(p)
    p.add_argument("--points", required=True, help="labeled points CSV")
    p.add_argument("--target", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--scheme", choices=["path", "difference"], default="path")
    p.add_argument("--h", type=float, default=None)
    p.set_defaults(func=cmd_labeled_depth)

    p = sub.add_parser("sample", help="draw points from a density config")
    common(p)
    p.add_argument("--density", required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("whiten", help="whiten a point cloud by its scatter")
    common(p)
    p.add_argument("--points", required=True)
    p.set_defaults(func=cmd_whiten)

    p = sub.add_parser("report", help="run a named property check")
    common(p)
    p.add_argument("--check", required=True,
                   choices=["comparison", "scaling", "rigid", "sandwich",
                            "stability", "modes", "supersolution"])
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--a", type=float, default=2.0)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--sep", type=float, default=4.0,
                   help="mode separation in units of sigma")
    p.add_argument("--pairs", type=int, default=None)
    p.add_argument("--which", choices=["uniform", "gaussian"],
                   default="uniform")
    p.add_argument("--n", type=int, default=None)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "pairs", None) is None:
        args.pairs = 50 if getattr(args, "check", "") == "comparison" else 20
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        # ConfigError is a ValueError; model validation raises plain ones
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

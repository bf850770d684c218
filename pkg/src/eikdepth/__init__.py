"""Density-weighted eikonal depth on grids, graphs, and point clouds."""

from .analysis import (
    PropertyReport,
    ScatterTransform,
    WarpMap,
    carve_channel,
    fit_scatter,
    isometric_robustness_check,
    mode_separation_predicate,
    stability_check,
    tukey_depth_2d,
    unwhiten,
    whiten,
)
from .density import (
    CylinderSurface,
    DensityModel,
    Domain,
    GaussianMixture,
    GridDensity,
    PhiSpec,
    TruncatedPowerLaw,
    UniformBall,
    UniformBox,
    ball_uniform_depth,
    default_domain,
    eval_density,
    gaussian_radial_depth,
    load_density,
    model_from_config,
    model_to_config,
    powerlaw_depth_lower_bound,
    quantile_depth_1d,
    sample,
    save_density,
    standard_gaussian,
    supersolution_bound,
)
from .errors import ConfigError, SolverError
from .graphs import (
    GraphDepth,
    KernelSpec,
    WeightedGraph,
    build_kernel_graph,
    build_knn_graph,
    graph_from_edges,
    graph_local_update,
    load_graph,
    load_points,
    local_maxima,
    path_depth,
    pointcloud_eikonal,
    save_depth_csv,
    save_graph,
    save_points,
    sigma_normalization,
)
from .gridsolve import (
    DepthField,
    GridSpec,
    Polyline,
    SupersolutionOnBoxEdge,
    ZeroOnBoxEdge,
    ZeroOnMask,
    fast_marching,
    grid_local_maxima,
    level_set,
    load_field,
    local_update,
    make_grid,
    save_field,
    solve_depth,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

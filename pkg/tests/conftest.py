"""Shared fixtures and the acceptance summary reporter."""

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite", max_examples=40, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("suite")

# (number, name, passed, detail) records appended by the acceptance tests
ACCEPTANCE = []


def record(num: int, name: str, ok: bool, detail: str = "") -> bool:
    ACCEPTANCE.append((num, name, bool(ok), detail))
    return bool(ok)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, name, ok, detail in sorted(ACCEPTANCE):
        line = "criterion %2d  %-28s %s" % (num, name, "PASS" if ok else "FAIL")
        if detail:
            line += "  [%s]" % detail
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def warm_kernels():
    """Compile the jitted solvers once so timed runs measure the solve."""
    from eikdepth import density, graphs, gridsolve

    model = density.UniformBox(np.zeros(2), np.ones(2))
    gridsolve.solve_depth(model, density.PhiSpec.unnormalized(), n=9)
    rng = np.random.default_rng(0)
    pts = rng.random((64, 2))
    ker = graphs.KernelSpec("indicator", h=0.4, dim=2)
    g = graphs.build_kernel_graph(pts, ker)
    bnd = np.zeros(64, dtype=bool)
    bnd[:8] = True
    graphs.pointcloud_eikonal(g, rho=np.ones(64), boundary=bnd)
    graphs.path_depth(g, rho=np.ones(64), boundary=bnd)
    return True

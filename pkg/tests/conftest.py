"""Shared fixtures. Kernels are session-scoped because assembly dominates test time."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from choquard.config import load_config
from choquard.grid import build_log_grid
from choquard.riesz import assemble_kernel

ROOT = Path(__file__).resolve().parents[1]
SHIPPED = ROOT / "configs" / "shipped.json"
CONSTANTS_REFERENCE = ROOT / "configs" / "constants_reference.json"


@pytest.fixture(scope="session")
def shipped_cfg():
    return load_config(SHIPPED)


@pytest.fixture(scope="session")
def shipped_spec(shipped_cfg):
    return shipped_cfg.problem


@pytest.fixture(scope="session")
def shipped_grid(shipped_cfg):
    return shipped_cfg.grid()


@pytest.fixture(scope="session")
def shipped_kernel(shipped_spec, shipped_grid):
    return assemble_kernel(shipped_grid, shipped_spec.mu)


@pytest.fixture(scope="session")
def shipped_solution(shipped_cfg, shipped_spec, shipped_grid, shipped_kernel):
    """The shipped ground-state run; shared because it takes most of a minute."""
    from choquard import solver
    init = solver.gaussian_profile(shipped_grid, V=shipped_spec.V)
    return solver.solve_ground_state(shipped_spec, shipped_grid, shipped_kernel, init, tol=shipped_cfg.tol,
                                     max_iter=shipped_cfg.max_iter, seed=shipped_cfg.seed)


@pytest.fixture(scope="session")
def small_grid():
    return build_log_grid(1e-4, 20.0, 256)


@pytest.fixture(scope="session")
def small_kernel(small_grid):
    return assemble_kernel(small_grid, 1.0)


@pytest.fixture(scope="session")
def unit_disc_kernels():
    """Kernels on [1e-6, 1] with 2048 nodes, where the unit-disc indicator is exact."""
    grid = build_log_grid(1e-6, 1.0, 2048)
    return {mu: assemble_kernel(grid, mu) for mu in (0.5, 1.0)}


def write_config(tmp_path: Path, data: dict, name: str = "cfg.json") -> Path:
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


def shipped_data() -> dict:
    return json.loads(SHIPPED.read_text())


def gaussian(grid, width=1.0):
    return grid.sample(lambda r: np.exp(-(r / width) ** 2))


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for key in sorted(results):
            terminalreporter.write_line(results[key])

"""Radial grids, piecewise-linear radial functions and radial quadrature.

A radial function on R^2 is stored by its nodal values on a grid
r_1 < ... < r_N and interpreted as the piecewise-linear interpolant.
Integrals over the plane use the measure dx = 2 pi r dr. The disc of radius
r_min around the origin and the exterior of r_max are not part of the
computational domain; nothing is extrapolated there.
"""
from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, NumericError, UsageError

DEFAULT_R_MIN = 1e-6
DEFAULT_R_MAX = 50.0
DEFAULT_N_NODES = 1024
MIN_NODES = 16


def p1_weights(nodes: np.ndarray) -> np.ndarray:
    """Weights w_i with sum_i w_i g_i = int (P1 interpolant of g) r dr."""
    h = np.diff(nodes)
    w = np.zeros_like(nodes)
    w[:-1] += h * (2.0 * nodes[:-1] + nodes[1:]) / 6.0
    w[1:] += h * (nodes[:-1] + 2.0 * nodes[1:]) / 6.0
    return w


@dataclass(frozen=True, eq=False)
class RadialGrid:
    nodes: np.ndarray
    quad_weights: np.ndarray = field(repr=False)
    log_uniform: bool = False

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 3:
            raise ConfigurationError("a radial grid needs at least 3 nodes")
        if not np.all(np.isfinite(nodes)) or nodes[0] <= 0.0:
            raise ConfigurationError("grid nodes must be finite and positive")
        if np.any(np.diff(nodes) <= 0.0):
            raise ConfigurationError("grid nodes must be strictly increasing")
        weights = np.asarray(self.quad_weights, dtype=float)
        if weights.shape != nodes.shape or np.any(weights < 0.0):
            raise ConfigurationError("quadrature weights must be nonnegative, one per node")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "quad_weights", weights)

    @classmethod
    def from_nodes(cls, nodes) -> "RadialGrid":
        nodes = np.asarray(nodes, dtype=float)
        ratios = nodes[1:] / nodes[:-1]
        log_uniform = bool(nodes.size > 2 and np.allclose(ratios, ratios[0], rtol=1e-12, atol=0.0))
        return cls(nodes, p1_weights(nodes), log_uniform)

    @property
    def n(self) -> int:
        return self.nodes.size

    @property
    def r_min(self) -> float:
        return float(self.nodes[0])

    @property
    def r_max(self) -> float:
        return float(self.nodes[-1])

    @property
    def ratio(self) -> float:
        """Constant ratio between consecutive nodes of a log-uniform grid."""
        if not self.log_uniform:
            raise UsageError("grid is not log-uniform")
        return float(self.nodes[1] / self.nodes[0])

    def measure(self) -> np.ndarray:
        """Nodal weights of the planar measure, 2 pi w_i."""
        return 2.0 * np.pi * self.quad_weights

    def function(self, values) -> "RadialFunction":
        return RadialFunction(self, values)

    def sample(self, func) -> "RadialFunction":
        return RadialFunction(self, func(self.nodes))

    def truncated(self, radius: float) -> "RadialGrid":
        """Grid on [r_min, radius]: the nodes below ``radius`` plus ``radius`` itself."""
        if not self.r_min < radius:
            raise ConfigurationError(f"cannot truncate at {radius}: below r_min={self.r_min}")
        inner = self.nodes[self.nodes < radius * (1.0 - 1e-12)]
        return RadialGrid.from_nodes(np.append(inner, radius))

    def scaled(self, factor: float) -> "RadialGrid":
        """Dilated grid with nodes factor * r_i."""
        if factor <= 0.0:
            raise ConfigurationError("dilation factor must be positive")
        return RadialGrid(self.nodes * factor, self.quad_weights * factor**2, self.log_uniform)

    def fingerprint(self) -> str:
        return hashlib.sha256(self.nodes.tobytes()).hexdigest()

    def __eq__(self, other):
        if not isinstance(other, RadialGrid):
            return NotImplemented
        return self is other or (self.n == other.n and np.array_equal(self.nodes, other.nodes))

    def __hash__(self):
        return hash(self.fingerprint())


def build_log_grid(r_min: float = DEFAULT_R_MIN, r_max: float = DEFAULT_R_MAX,
                   n_nodes: int = DEFAULT_N_NODES) -> RadialGrid:
    """Log-uniform grid on [r_min, r_max] with P1 weights for the measure r dr."""
    if not (np.isfinite(r_min) and np.isfinite(r_max)) or r_min <= 0.0 or r_max <= 0.0:
        raise ConfigurationError(f"radii must be positive and finite (got r_min={r_min}, r_max={r_max})")
    if r_min >= r_max:
        raise ConfigurationError(f"r_min >= r_max ({r_min} >= {r_max})")
    if int(n_nodes) != n_nodes or n_nodes < MIN_NODES:
        raise ConfigurationError(f"n_nodes must be an integer >= {MIN_NODES} (got {n_nodes})")
    n_nodes = int(n_nodes)
    nodes = r_min * np.exp(np.linspace(0.0, np.log(r_max / r_min), n_nodes))
    nodes[0], nodes[-1] = r_min, r_max
    return RadialGrid(nodes, p1_weights(nodes), True)


@dataclass(frozen=True, eq=False)
class RadialFunction:
    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.n,):
            raise UsageError(f"expected {self.grid.n} nodal values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise NumericError(f"non-finite value at node {bad} (r={self.grid.nodes[bad]:.6g})")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def with_values(self, values) -> "RadialFunction":
        return RadialFunction(self.grid, values)

    def __add__(self, other):
        return self.with_values(self.values + _values_on(self.grid, other))

    def __sub__(self, other):
        return self.with_values(self.values - _values_on(self.grid, other))

    def __mul__(self, other):
        if isinstance(other, RadialFunction):
            return self.with_values(self.values * _values_on(self.grid, other))
        return self.with_values(self.values * float(other))

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)

    def __call__(self, r):
        """Piecewise-linear evaluation, zero outside [r_min, r_max]."""
        return np.interp(r, self.grid.nodes, self.values, left=0.0, right=0.0)

    def to_csv(self, path, header=("r", "value")) -> None:
        write_profile_csv(path, self.grid.nodes, {header[1]: self.values}, r_name=header[0])

    @classmethod
    def from_csv(cls, path) -> "RadialFunction":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(RadialGrid.from_nodes(data[:, 0]), data[:, 1])


def _values_on(grid: RadialGrid, other) -> np.ndarray:
    if isinstance(other, RadialFunction):
        if other.grid != grid:
            raise UsageError("radial functions live on different grids")
        return other.values
    return np.asarray(other, dtype=float)


def integrate(g: RadialFunction) -> float:
    """Approximate int_{R^2} g(|x|) dx = 2 pi int g(r) r dr over [r_min, r_max]."""
    return float(2.0 * np.pi * np.dot(g.grid.quad_weights, g.values))


def _derivative_stencils(nodes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # three-point stencils exact on span{1, r, log r}; second order for smooth data
    n = nodes.size
    idx = np.empty((n, 3), dtype=int)
    idx[1:-1] = np.arange(n - 2)[:, None] + np.arange(3)[None, :]
    idx[0] = (0, 1, 2)
    idx[-1] = (n - 3, n - 2, n - 1)
    r = nodes[idx]
    r0 = nodes[:, None]
    # shift and scale for conditioning: basis 1, (r - r0)/r0, log(r/r0)
    basis = np.stack([np.ones_like(r), (r - r0) / r0, np.log(r / r0)], axis=1)
    rhs = np.stack([np.zeros(n), 1.0 / nodes, 1.0 / nodes], axis=1)
    coeffs = np.linalg.solve(basis, rhs[..., None])[..., 0]
    return idx, coeffs


def radial_derivative(u: RadialFunction) -> RadialFunction:
    """du/dr at every node.

    Central three-point stencils inside, one-sided at the two ends. Each
    stencil differentiates 1, r and log r exactly and is second order for
    smooth data.
    """
    idx, coeffs = _derivative_stencils(u.grid.nodes)
    v = u.values[idx]
    # differences against the middle point make constants differentiate to exactly 0
    return u.with_values(coeffs[:, 0] * (v[:, 0] - v[:, 1]) + coeffs[:, 2] * (v[:, 2] - v[:, 1]))


def write_profile_csv(path, r, columns: dict, r_name: str = "r") -> None:
    path = Path(path)
    names = [r_name, *columns]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        cols = [np.asarray(r)] + [np.asarray(v) for v in columns.values()]
        for row in zip(*cols):
            writer.writerow([repr(float(x)) for x in row])

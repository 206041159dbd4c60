"""Moser sequences, their potential integrals and Trudinger-Moser growth probes.

The normalized Moser profile is

    w_n(r) = (2 pi)^{-1/2} * { sqrt(log n)              r <= 1/n
                               log(1/r) / sqrt(log n)    1/n < r <= 1
                               0                         r > 1 }

with int |grad w_n|^2 = 1. For V(r) = M1 r^{a0} on the unit disc the
potential part I_n = int V w_n^2 has the closed form (c = a0 + 2)

    I_n = 2 M1 / (c^3 log n) - 2 M1 / (c^3 n^c log n) - 2 M1 / (c^2 n^c).

``delta_n_closed_form`` returns the majorant in which the last term carries
c^3 instead of c^2. Both share the limit delta_n log n -> 2 M1 / c^3, and
the majorant dominates I_n exactly when c >= 1.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import quad

from .energy import kinetic_energy
from .errors import ConfigurationError, DomainError, NumericError
from .grid import RadialFunction, RadialGrid
from .model import PotentialSpec, ProblemSpec

QUAD_OPTS = {"epsabs": 0.0, "epsrel": 1e-13, "limit": 200}


def _check_n(n) -> int:
    if int(n) != n or n < 2:
        raise DomainError(f"Moser index must be an integer >= 2, got {n}")
    return int(n)


def moser_value(n: int, r) -> np.ndarray:
    """Exact w_n(r)."""
    n = _check_n(n)
    r = np.asarray(r, dtype=float)
    ln = math.log(n)
    with np.errstate(divide="ignore"):
        mid = np.log(1.0 / np.where(r > 0.0, r, 1.0)) / math.sqrt(ln)
    out = np.where(r <= 1.0 / n, math.sqrt(ln), np.where(r <= 1.0, mid, 0.0))
    return out / math.sqrt(2.0 * math.pi)


def moser_function(n: int, grid: RadialGrid) -> RadialFunction:
    """Nodal samples of w_n; the grid must reach inside r = 1/n and out to r = 1."""
    n = _check_n(n)
    if not grid.r_min < 1.0 / n:
        raise ConfigurationError(f"grid starts at r_min={grid.r_min:g}, not inside the plateau radius 1/n={1.0 / n:g}")
    if grid.r_max < 1.0:
        raise ConfigurationError(f"grid ends at r_max={grid.r_max:g} < 1")
    return grid.function(moser_value(n, grid.nodes))


def with_breakpoints(n: int, grid: RadialGrid) -> RadialGrid:
    """``grid`` with the two kinks of w_n, r = 1/n and r = 1, added as nodes."""
    n = _check_n(n)
    nodes = np.union1d(grid.nodes, [1.0 / n, 1.0])
    return RadialGrid.from_nodes(nodes[nodes <= grid.r_max])


def moser_grad_check(n: int, grid: RadialGrid) -> float:
    """2 pi int |w_n'|^2 r dr, the exact value being 1.

    The profile is sampled on ``grid`` plus its two kinks, so the
    piecewise-linear interpolant is exact on the plateau and outside the unit
    disc and only the logarithmic part carries discretization error.
    """
    return kinetic_energy(moser_function(n, with_breakpoints(n, grid)))


def delta_n_closed_form(n: int, a0: float, M1: float) -> float:
    """Majorant 2M1/(c^3 log n) - 2M1/(c^3 n^c log n) - 2M1/(c^3 n^c), c = a0 + 2."""
    n = _check_n(n)
    if not a0 > -2.0:
        raise DomainError(f"a0 must exceed -2, got {a0}")
    c = a0 + 2.0
    ln = math.log(n)
    nc = float(n) ** (-c)
    k = 2.0 * M1 / c**3
    return k / ln - k * nc / ln - k * nc


def moser_I_closed_form(n: int, a0: float, M1: float) -> float:
    """Exact int M1 |x|^{a0} w_n^2 dx."""
    n = _check_n(n)
    if not a0 > -2.0:
        raise DomainError(f"a0 must exceed -2, got {a0}")
    c = a0 + 2.0
    ln = math.log(n)
    nc = float(n) ** (-c)
    return 2.0 * M1 / (c**3 * ln) - 2.0 * M1 * nc / (c**3 * ln) - 2.0 * M1 * nc / c**2


def moser_I_numeric(n: int, V: PotentialSpec) -> float:
    """int V w_n^2 dx by adaptive quadrature of the exact profile, split at r = 1/n."""
    n = _check_n(n)
    ln = math.log(n)

    def inner(r):
        return float(V(np.array([r]))[0]) * r

    def outer(r):
        return float(V(np.array([r]))[0]) * r * math.log(1.0 / r) ** 2

    a, _ = quad(inner, 0.0, 1.0 / n, **QUAD_OPTS)
    b, _ = quad(outer, 1.0 / n, 1.0, **QUAD_OPTS)
    return a * ln + b / ln


def moser_I_grid(n: int, V: PotentialSpec, grid: RadialGrid) -> float:
    """int V w_n^2 dx by nodal quadrature on ``grid`` (pinhole r < r_min omitted)."""
    w = moser_function(n, grid)
    return float(np.dot(grid.measure(), V(grid.nodes) * w.values**2))


def estimate_M1(V: PotentialSpec, r_min: float = 1e-6, samples: int = 400) -> float:
    """sup of V(r)/r^{a0} over log-spaced r in [r_min, 1]; equals the coefficient for power laws."""
    r = np.geomspace(r_min, 1.0, samples)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        ratio = V(r) / r**V.e0
    if not np.all(np.isfinite(ratio)):
        raise NumericError("V(r)/r^a0 is not finite on the sample window")
    return float(ratio.max())


@dataclass
class MoserDiagnostics:
    n: int
    grad_norm_sq: float
    I_n: float
    delta_n: float
    delta_n_log_n: float
    limit_target: float
    M1: float
    I_n_grid: float = float("nan")

    def to_dict(self) -> dict:
        return asdict(self)


def moser_diagnostics(n: int, V: PotentialSpec, grid: RadialGrid) -> MoserDiagnostics:
    M1 = estimate_M1(V, grid.r_min)
    a0 = V.e0
    delta = delta_n_closed_form(n, a0, M1)
    return MoserDiagnostics(
        n=int(n), grad_norm_sq=moser_grad_check(n, grid), I_n=moser_I_numeric(n, V), delta_n=delta,
        delta_n_log_n=delta * math.log(n), limit_target=2.0 * M1 / (a0 + 2.0) ** 3, M1=M1,
        I_n_grid=moser_I_grid(n, V, grid),
    )


# ---------------------------------------------------------------------------
# Trudinger-Moser probe
# ---------------------------------------------------------------------------

def tm_integral(n: int, alpha: float, spec: ProblemSpec, delta: float | None = None) -> float:
    """T(alpha, n) = int Q^{4/(4-mu)} (e^{alpha w^2} - 1) dx with w = w_n / sqrt(1 + delta_n)."""
    n = _check_n(n)
    if not alpha > 0.0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    V, Q = spec.V, spec.Q
    if delta is None:
        delta = delta_n_closed_form(n, V.e0, estimate_M1(V))
    s = 1.0 / (1.0 + delta)
    power = 4.0 / (4.0 - spec.mu)
    ln = math.log(n)
    plateau = alpha * s * ln / (2.0 * math.pi)
    if plateau > 700.0:
        raise NumericError(f"e^(alpha w^2) overflows on the plateau for n={n}, alpha={alpha:g}")

    def qw(r):
        return float(Q(np.array([r]))[0]) ** power * r

    def outer(r):
        return qw(r) * math.expm1(alpha * s * math.log(1.0 / r) ** 2 / (2.0 * math.pi * ln))

    a, _ = quad(qw, 0.0, 1.0 / n, **QUAD_OPTS)
    b, _ = quad(outer, 1.0 / n, 1.0, **QUAD_OPTS)
    return 2.0 * math.pi * (a * math.expm1(plateau) + b)


def tm_probe(spec: ProblemSpec, kernel_grid: RadialGrid | None, alpha: float, n_list) -> list:
    """T(alpha, n) for each n; entries that overflow are reported as inf with a warning.

    The integrals are taken by adaptive quadrature of the exact profile, so
    the plateau r < 1/n is covered down to the origin; ``kernel_grid`` is
    accepted for interface symmetry and checked to reach inside 1/max(n).
    """
    n_list = [int(n) for n in n_list]
    if not n_list:
        raise ConfigurationError("n_list is empty")
    if kernel_grid is not None and not kernel_grid.r_min < 1.0 / max(n_list):
        raise ConfigurationError(f"grid r_min={kernel_grid.r_min:g} does not reach 1/n={1.0 / max(n_list):g}")
    M1 = estimate_M1(spec.V)
    out = []
    for n in n_list:
        try:
            out.append(tm_integral(n, alpha, spec, delta_n_closed_form(n, spec.V.e0, M1)))
        except NumericError as exc:
            warnings.warn(str(exc), RuntimeWarning, stacklevel=2)
            out.append(math.inf)
    return out


def growth_indicator(values) -> float:
    """Last over first entry of a probe sequence."""
    values = list(values)
    return values[-1] / values[0]

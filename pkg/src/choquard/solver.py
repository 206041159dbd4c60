"""Ground-state candidates by Nehari-projected steepest descent.

Each iterate sits on the Nehari set: it is rescaled to the maximum of its
fibering map. The descent direction is the Riesz representative of -J'(u)
in the Y inner product, obtained with one banded Cholesky solve. On a log
grid the stiffness matrix is a one-dimensional Laplacian in log r whose
condition number grows like N^2, so a diagonal scaling does not remove the
stiffness while the exact Y metric does.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded

from .energy import EnergyBreakdown, EnergyFunctional
from .errors import DomainError, FiberingError, NumericError, StagnationError, UsageError
from .grid import RadialFunction, RadialGrid
from .model import PotentialSpec, ProblemSpec, c0_threshold, moser_level_bound
from .riesz import RieszKernel

ARMIJO_C1 = 1e-4
MAX_HALVINGS = 60
STAGNATION_WINDOW = 50
N_PROBES = 20


@dataclass
class Solution:
    u: RadialFunction
    energy: EnergyBreakdown
    residual_norm: float
    iterations: int
    converged: bool
    c0: float
    level_ok: bool
    ps_bound_ok: bool
    theta: float
    probe_residual: float = float("nan")
    hat_residual: float = float("nan")
    nehari_residual: float = float("nan")
    monotone: bool = True
    clip_ok: bool = True
    stop_reason: str = ""
    history: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "stop_reason": self.stop_reason,
            "iterations": self.iterations,
            "residual_norm": self.residual_norm,
            "probe_residual": self.probe_residual,
            "hat_residual": self.hat_residual,
            "nehari_residual": self.nehari_residual,
            "energy": self.energy.to_dict(),
            "theta": self.theta,
            "c0": self.c0,
            "level_ok": self.level_ok,
            "ps_bound_ok": self.ps_bound_ok,
            "monotone": self.monotone,
            "clip_ok": self.clip_ok,
        }


# ---------------------------------------------------------------------------
# initial profiles
# ---------------------------------------------------------------------------

def gaussian_profile(grid: RadialGrid, width: float = 1.0, V: PotentialSpec | None = None) -> RadialFunction:
    """e^{-r^2/width^2}, scaled to unit Y-norm when V is given."""
    u = grid.function(np.exp(-(grid.nodes / width) ** 2))
    if V is not None:
        from .energy import y_norm_sq
        u = u * (1.0 / math.sqrt(y_norm_sq(u, V)))
    return u


def cutoff_profile(grid: RadialGrid) -> RadialFunction:
    """Smooth radial cutoff: 1 on r <= 1/2, 0 on r >= 1, monotone in between."""
    x = np.clip(2.0 * (grid.nodes - 0.5), 0.0, 1.0)

    def bump(t):
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(t > 0.0, np.exp(-1.0 / np.where(t > 0.0, t, 1.0)), 0.0)

    down = bump(1.0 - x)
    return grid.function(down / (down + bump(x)))


# ---------------------------------------------------------------------------
# the iteration
# ---------------------------------------------------------------------------

class _Metric:
    """Y inner product, optionally restricted to span of the columns of B."""

    def __init__(self, E: EnergyFunctional, basis: np.ndarray | None):
        self.E = E
        self.basis = basis
        if basis is None:
            self.chol = cholesky_banded(E.banded_A(), lower=False)
        else:
            AB = np.column_stack([E.apply_A(b) for b in basis.T])
            self.gram = basis.T @ AB
            self.gram_chol = np.linalg.cholesky(self.gram)

    def riesz(self, grad: np.ndarray) -> np.ndarray:
        """Y-representative of the functional v -> grad . v (within the subspace if any)."""
        if self.basis is None:
            return cho_solve_banded((self.chol, False), grad)
        coef = np.linalg.solve(self.gram, self.basis.T @ grad)
        return self.basis @ coef


def dual_norm(E: EnergyFunctional, grad: np.ndarray, metric: _Metric | None = None) -> float:
    """sup_phi |grad . phi| / ||phi|| for the discrete functional with nodal gradient ``grad``."""
    metric = metric or _Metric(E, None)
    return math.sqrt(max(float(grad @ metric.riesz(grad)), 0.0))


def _probe_directions(grid: RadialGrid, n: int, seed: int) -> np.ndarray:
    # smooth random bumps in log r: sums of a few Gaussians with random centres and widths
    rng = np.random.default_rng(seed)
    x = np.log(grid.nodes)
    out = np.zeros((n, grid.n))
    for k in range(n):
        for _ in range(3):
            c = rng.uniform(np.log(1e-3), np.log(10.0))
            w = rng.uniform(0.3, 2.0)
            out[k] += rng.normal() * np.exp(-((x - c) / w) ** 2)
    return out


def probe_residual(E: EnergyFunctional, u: np.ndarray, n_probes: int = N_PROBES, seed: int = 42) -> float:
    """max over seeded random smooth phi of |J'(u) phi| / ||phi||."""
    grad = E.gradient(u)
    best = 0.0
    for phi in _probe_directions(E.grid, n_probes, seed):
        best = max(best, abs(float(grad @ phi)) / math.sqrt(E.inner(phi, phi)))
    return best


def hat_residual(E: EnergyFunctional, u: np.ndarray) -> float:
    """max_j |J'(u) psi_j| / ||psi_j|| over the nodal hat functions."""
    grad = E.gradient(u)
    diag = E.banded_A()[1]
    return float(np.max(np.abs(grad) / np.sqrt(diag)))


def solve_ground_state(spec: ProblemSpec, grid: RadialGrid, kernel: RieszKernel, init: RadialFunction,
                       tol: float = 1e-6, max_iter: int = 5000, seed: int = 42,
                       subspace: np.ndarray | None = None, clip: bool | None = None,
                       log=None) -> Solution:
    """Nehari-projected steepest descent in the Y metric with Armijo backtracking.

    ``subspace`` (N x m) restricts the iterates to the span of its columns.
    ``clip`` zeroes negative nodal values after each step; it defaults to the
    nonlinearity's f = 0 on s <= 0 convention. ``log`` receives one line per
    iteration.
    """
    if kernel.grid != grid or init.grid != grid:
        raise UsageError("grid, kernel and initial profile must share one grid")
    u = np.array(init.values, dtype=float)
    if not np.any(u != 0.0):
        raise UsageError("initial profile is identically zero: the Nehari projection is undefined")
    if clip is None:
        clip = spec.f.nonneg
    if clip and np.any(u < 0.0):
        raise UsageError("initial profile must be nonnegative")
    if not max_iter >= 0:
        raise UsageError("max_iter must be nonnegative")
    E = EnergyFunctional(spec, kernel)
    if subspace is not None:
        subspace = np.asarray(subspace, dtype=float)
        if subspace.ndim != 2 or subspace.shape[0] != grid.n:
            raise UsageError("subspace must have one row per node")
        coef, *_ = np.linalg.lstsq(subspace, u, rcond=None)
        u = subspace @ coef
    metric = _Metric(E, subspace)

    def project(v, t_guess=1.0):
        try:
            t, J = E.fibering_maximize(v, t_guess)
        except FiberingError as exc:
            exc.state = v
            raise
        return t * v, J

    def emit(line):
        if log is not None:
            log(line)

    u, J = project(u)
    history = [J]
    monotone = True
    clip_ok = True
    step = 1.0
    stale = 0
    converged = False
    stop_reason = "max_iter"
    it = 0
    grad = E.gradient(u)
    d = -metric.riesz(grad)
    res = math.sqrt(max(-float(grad @ d), 0.0))
    emit(f"iter 0 J={J:.15g} residual={res:.6e}")
    while True:
        if res < tol:
            converged, stop_reason = True, "converged"
            break
        if it >= max_iter:
            break
        it += 1
        accepted = False
        s = min(2.0 * step, 1.0)
        for _ in range(MAX_HALVINGS):
            trial = u + s * d
            if clip:
                before = None
                if np.any(trial < 0.0):
                    try:
                        before = E.J(trial)
                    except NumericError:
                        before = None
                    trial = np.maximum(trial, 0.0)
                    if before is not None and E.J(trial) > before + 1e-12 * abs(before):
                        clip_ok = False
            try:
                new, J_new = project(trial)
            except (NumericError, FiberingError):
                s *= 0.5
                continue
            if J_new <= J - ARMIJO_C1 * s * res * res:
                accepted = True
                break
            s *= 0.5
        if not accepted:
            stale += 1
            emit(f"iter {it} line search failed (stale {stale})")
            if stale >= STAGNATION_WINDOW:
                err = StagnationError(f"stagnation: J did not decrease over {STAGNATION_WINDOW} consecutive steps")
                err.state = u
                raise err
            step = max(step * 0.5, 1e-12)
            continue
        if J_new > J:
            monotone = False
        stale = stale + 1 if J_new >= J else 0
        if stale >= STAGNATION_WINDOW:
            err = StagnationError(f"stagnation: J did not decrease over {STAGNATION_WINDOW} consecutive steps")
            err.state = new
            raise err
        u, J, step = new, J_new, s
        history.append(J)
        grad = E.gradient(u)
        d = -metric.riesz(grad)
        res = math.sqrt(max(-float(grad @ d), 0.0))
        emit(f"iter {it} J={J:.15g} residual={res:.6e} step={s:.3e}")

    energy = E.breakdown(u)
    theta = spec.f.theta
    c0 = c0_threshold(spec.mu, spec.b0, spec.f.alpha0, theta)
    bound = 2.0 * theta / (theta - 1.0) * energy.J
    sol = Solution(
        u=grid.function(u), energy=energy, residual_norm=res, iterations=it, converged=converged,
        c0=c0, level_ok=energy.J < c0, ps_bound_ok=energy.norm_sq <= bound * (1.0 + 1e-6),
        theta=theta, probe_residual=probe_residual(E, u, seed=seed), hat_residual=hat_residual(E, u),
        nehari_residual=E.nehari(u), monotone=monotone, clip_ok=clip_ok, stop_reason=stop_reason,
        history=history,
    )
    return sol


# ---------------------------------------------------------------------------
# diagnostics on a converged candidate
# ---------------------------------------------------------------------------

def ps_bound_check(sol: Solution, theta: float, rtol: float = 1e-6) -> tuple[float, bool]:
    """((2 theta/(theta - 1)) J(u*), ||u*||^2 <= bound (1 + rtol))."""
    if not sol.converged:
        raise UsageError("ps_bound_check needs a converged solution")
    if not theta > 1.0:
        raise DomainError(f"theta must exceed 1, got {theta}")
    bound = 2.0 * theta / (theta - 1.0) * sol.energy.J
    return bound, bool(sol.energy.norm_sq <= bound * (1.0 + rtol))


@dataclass
class LevelReport:
    J: float
    c0: float
    moser_bound: float
    c0_margin: float
    moser_margin: float
    below_c0: bool
    below_moser_bound: bool
    notes: list

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def level_report(J: float, spec: ProblemSpec) -> LevelReport:
    c0 = c0_threshold(spec.mu, spec.b0, spec.f.alpha0, spec.f.theta)
    mb = moser_level_bound(spec.mu, spec.b0, spec.f.alpha0)
    notes = []
    if not J < c0:
        notes.append("outside the compactness regime: J(u*) >= c0")
    if not J < mb:
        notes.append("above the Moser-sequence level bound")
    return LevelReport(J, c0, mb, c0 - J, mb - J, J < c0, J < mb, notes)


def level_check(sol: Solution, spec: ProblemSpec) -> LevelReport:
    """Compare J(u*) with c0 and with the Moser-sequence level bound."""
    if not sol.converged:
        raise UsageError("level_check needs a converged solution")
    return level_report(sol.energy.J, spec)


def path_max(u_dir: RadialFunction, spec: ProblemSpec, kernel: RieszKernel, t_max: float,
             n_samples: int) -> float:
    """max of J(t u_dir) over t sampled on [0, t_max] (only t_max when n_samples == 1).

    Sampling stops with a warning at the first t where the energy overflows.
    """
    if not np.any(u_dir.values != 0.0):
        raise UsageError("path_max needs a nonzero direction")
    if n_samples < 1 or not t_max > 0.0:
        raise UsageError("path_max needs n_samples >= 1 and t_max > 0")
    E = EnergyFunctional(spec, kernel)
    ts = np.array([t_max]) if n_samples == 1 else np.linspace(0.0, t_max, n_samples)
    best = -math.inf
    for t in ts:
        try:
            best = max(best, E.J(t * u_dir.values))
        except NumericError as exc:
            warnings.warn(f"path_max: sampling truncated at t={t:.6g} ({exc})", RuntimeWarning, stacklevel=2)
            break
    return best

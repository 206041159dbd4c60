"""Y-norm, energy functional J, its derivative and the fibering map t -> J(t u).

Discretization: u is piecewise linear in r. The kinetic term is the exact
Dirichlet energy of the interpolant, the potential term uses the nodal
quadrature weights, and the nonlocal term is g^T K g with g_i = Q(r_i) F(u_i).
Every derivative below is the exact derivative of this discrete J, so the
nodal gradient, the directional derivative and the fibering slope agree to
rounding error.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError, FiberingError, NumericError, UsageError
from .grid import RadialFunction, RadialGrid
from .model import PotentialSpec, ProblemSpec
from .riesz import RieszKernel

T_MIN = 1e-8
T_MAX = 1e8


def _potential_values(w: PotentialSpec, grid: RadialGrid) -> np.ndarray:
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        vals = np.asarray(w(grid.nodes), dtype=float)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise NumericError(f"{w.role} is not finite at node {i} (r={grid.nodes[i]:.6g})")
    return vals


def stiffness_weights(grid: RadialGrid) -> np.ndarray:
    """Per-cell weights k_c with 2 pi int |u'|^2 r dr = sum_c k_c (u_{c+1} - u_c)^2."""
    r = grid.nodes
    return np.pi * (r[:-1] + r[1:]) / np.diff(r)


def kinetic_energy(u: RadialFunction) -> float:
    """2 pi int |u'|^2 r dr for the piecewise-linear interpolant (exact)."""
    return float(np.dot(stiffness_weights(u.grid), np.diff(u.values) ** 2))


def y_norm_sq(u: RadialFunction, V: PotentialSpec | None) -> float:
    """||u||^2 = 2 pi int (|u'|^2 + V u^2) r dr; ``V=None`` stands for V = 0."""
    if V is None:
        return kinetic_energy(u)
    mass = u.grid.measure() * _potential_values(V, u.grid)
    return kinetic_energy(u) + float(np.dot(mass, u.values**2))


@dataclass(frozen=True)
class EnergyBreakdown:
    kinetic: float
    potential: float
    norm_sq: float
    nonlocal_: float
    J: float

    @property
    def nonlocal_term(self) -> float:
        return self.nonlocal_

    def to_dict(self) -> dict:
        d = asdict(self)
        d["nonlocal"] = d.pop("nonlocal_")
        return d


class EnergyFunctional:
    """Discrete J for one problem on one kernel grid, with cached operators.

    Methods take and return raw nodal arrays; the module-level functions wrap
    them for RadialFunction arguments.
    """

    def __init__(self, spec: ProblemSpec, kernel: RieszKernel):
        if abs(kernel.mu - spec.mu) > 0.0:
            raise UsageError(f"kernel exponent {kernel.mu} differs from the problem exponent {spec.mu}")
        self.spec = spec
        self.kernel = kernel
        self.grid = kernel.grid
        self.k_cell = stiffness_weights(self.grid)
        self.mass = self.grid.measure() * _potential_values(spec.V, self.grid)
        self.q = _potential_values(spec.Q, self.grid)
        self.nl = spec.f

    # -- quadratic part -----------------------------------------------------
    def apply_A(self, u: np.ndarray) -> np.ndarray:
        """Matrix of the Y inner product applied to nodal values."""
        flux = self.k_cell * np.diff(u)
        out = self.mass * u
        out[:-1] -= flux
        out[1:] += flux
        return out

    def inner(self, u: np.ndarray, v: np.ndarray) -> float:
        # difference form: avoids cancelling large stiffness terms against each other
        return float(np.dot(self.k_cell, np.diff(u) * np.diff(v)) + np.dot(self.mass, u * v))

    def banded_A(self) -> np.ndarray:
        """Upper banded storage of the (tridiagonal) Y inner-product matrix."""
        n = self.grid.n
        ab = np.zeros((2, n))
        diag = self.mass.copy()
        diag[:-1] += self.k_cell
        diag[1:] += self.k_cell
        ab[1] = diag
        ab[0, 1:] = -self.k_cell
        return ab

    # -- nonlinear evaluations --------------------------------------------
    def _eval(self, func, u: np.ndarray, what: str) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore"):
            out = np.asarray(func(u), dtype=float)
        bad = ~np.isfinite(out)
        if np.any(bad):
            i = int(np.flatnonzero(bad)[0])
            raise NumericError(f"overflow evaluating {what} at node {i} (r={self.grid.nodes[i]:.6g}, u={u[i]:.6g})")
        return out

    def _pair(self, a: np.ndarray, Kb: np.ndarray, what: str) -> float:
        with np.errstate(over="ignore", invalid="ignore"):
            val = float(a @ Kb)
        if not math.isfinite(val):
            raise NumericError(f"overflow in the nonlocal term {what}")
        return val

    def _apply(self, g: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore"):
            out = self.kernel.apply(g)
        if not np.all(np.isfinite(out)):
            i = int(np.flatnonzero(~np.isfinite(out))[0])
            raise NumericError(f"overflow in the Riesz potential at node {i} (r={self.grid.nodes[i]:.6g})")
        return out

    def source(self, u: np.ndarray) -> np.ndarray:
        """g = Q F(u) at the nodes."""
        return self.q * self._eval(self.nl.F, u, "F(u)")

    def breakdown(self, u: np.ndarray) -> EnergyBreakdown:
        kin = float(np.dot(self.k_cell, np.diff(u) ** 2))
        pot = float(np.dot(self.mass, u * u))
        g = self.source(u)
        nonlocal_ = self._pair(g, self._apply(g), "D(QF(u), QF(u))")
        norm_sq = kin + pot
        return EnergyBreakdown(kin, pot, norm_sq, nonlocal_, 0.5 * norm_sq - 0.5 * nonlocal_)

    def J(self, u: np.ndarray) -> float:
        g = self.source(u)
        return 0.5 * self.inner(u, u) - 0.5 * self._pair(g, self._apply(g), "D(QF(u), QF(u))")

    def gradient(self, u: np.ndarray) -> np.ndarray:
        """dJ/du_i = (A u)_i - Q_i f(u_i) (K g)_i."""
        Kg = self._apply(self.source(u))
        return self.apply_A(u) - self.q * self._eval(self.nl.f, u, "f(u)") * Kg

    def directional(self, u: np.ndarray, phi: np.ndarray) -> float:
        """J'(u) phi = <u, phi> - D(Q F(u), Q f(u) phi)."""
        g = self.source(u)
        gphi = self.q * self._eval(self.nl.f, u, "f(u)") * phi
        return self.inner(u, phi) - self._pair(gphi, self._apply(g), "D(QF(u), Qf(u) phi)")

    def nehari(self, u: np.ndarray) -> float:
        return self.directional(u, u)

    # -- fibering map h(t) = J(t u) ----------------------------------------
    def fiber(self, u: np.ndarray, t: float) -> tuple[float, float, float]:
        """(h(t), h'(t), h''(t)) along the ray t u."""
        A = self.inner(u, u)
        tu = t * u
        g = self.source(tu)
        fu = self.q * self._eval(self.nl.f, tu, "f(u)") * u
        fpu = self.q * self._eval(self.nl.f_prime, tu, "f'(u)") * u * u
        Kg = self._apply(g)
        h = 0.5 * t * t * A - 0.5 * self._pair(g, Kg, "along the ray")
        dh = t * A - self._pair(fu, Kg, "along the ray")
        d2h = A - self._pair(fu, self._apply(fu), "along the ray") - self._pair(fpu, Kg, "along the ray")
        return h, dh, d2h

    def fiber_slope_sign(self, u: np.ndarray, t: float) -> int:
        """Sign of h'(t); a ray that overflows counts as descending."""
        try:
            return int(np.sign(self.fiber(u, t)[1]))
        except NumericError:
            return -1

    def fibering_maximize(self, u: np.ndarray, t_guess: float = 1.0, rtol: float = 1e-14,
                          max_iter: int = 200) -> tuple[float, float]:
        """Unique t* > 0 with h'(t*) = 0, by bracketing then safeguarded Newton."""
        if not np.any(u != 0.0):
            raise FiberingError("no Nehari projection: u is identically zero")
        t_guess = min(max(t_guess, T_MIN), T_MAX)
        s0 = self.fiber_slope_sign(u, t_guess)
        lo = hi = t_guess
        if s0 > 0:
            while self.fiber_slope_sign(u, hi) > 0:
                lo, hi = hi, hi * 2.0
                if hi > T_MAX:
                    raise FiberingError(f"no Nehari projection: h' > 0 on [{t_guess:g}, {T_MAX:g}]")
        else:
            while self.fiber_slope_sign(u, lo) <= 0:
                hi, lo = lo, lo * 0.5
                if lo < T_MIN:
                    raise FiberingError(f"no Nehari projection: h' <= 0 on [{T_MIN:g}, {t_guess:g}]")
        t = 0.5 * (lo + hi)
        for _ in range(max_iter):
            try:
                _, dh, d2h = self.fiber(u, t)
            except NumericError:
                hi = t
                t = 0.5 * (lo + hi)
                continue
            if dh > 0.0:
                lo = t
            elif dh < 0.0:
                hi = t
            else:
                break
            step = dh / d2h if d2h < 0.0 else 0.0
            t_new = t - step
            if not (d2h < 0.0 and lo < t_new < hi):
                t_new = 0.5 * (lo + hi)
            if abs(t_new - t) <= rtol * t or hi - lo <= rtol * hi:
                t = t_new
                break
            t = t_new
        return t, self.J(t * u)


# ---------------------------------------------------------------------------
# functional wrappers
# ---------------------------------------------------------------------------

def _functional(spec: ProblemSpec, kernel: RieszKernel, *fns: RadialFunction) -> EnergyFunctional:
    for fn in fns:
        if fn.grid != kernel.grid:
            raise UsageError("radial function does not live on the kernel grid")
    return EnergyFunctional(spec, kernel)


def energy_J(u: RadialFunction, spec: ProblemSpec, kernel: RieszKernel) -> EnergyBreakdown:
    return _functional(spec, kernel, u).breakdown(u.values)


def derivative_J(u: RadialFunction, spec: ProblemSpec, kernel: RieszKernel, phi: RadialFunction) -> float:
    return _functional(spec, kernel, u, phi).directional(u.values, phi.values)


def gradient_J(u: RadialFunction, spec: ProblemSpec, kernel: RieszKernel) -> RadialFunction:
    return u.with_values(_functional(spec, kernel, u).gradient(u.values))


def fibering_maximize(u: RadialFunction, spec: ProblemSpec, kernel: RieszKernel) -> tuple[float, float]:
    return _functional(spec, kernel, u).fibering_maximize(u.values)


def nehari_residual(u: RadialFunction, spec: ProblemSpec, kernel: RieszKernel) -> float:
    """J'(u) u = ||u||^2 - D(Q F(u), Q f(u) u)."""
    return _functional(spec, kernel, u).nehari(u.values)


def fibering_sign_changes(u: RadialFunction, spec: ProblemSpec, kernel: RieszKernel,
                          n_samples: int = 161) -> int:
    """Number of sign changes of h'_u over log-spaced t in [1e-8, 1e8]."""
    E = _functional(spec, kernel, u)
    signs = [E.fiber_slope_sign(u.values, t) for t in np.geomspace(T_MIN, T_MAX, n_samples)]
    signs = [s for s in signs if s != 0]
    return int(sum(a != b for a, b in zip(signs, signs[1:])))


def embedding_ratio(u: RadialFunction, Q: PotentialSpec, mu: float, q_exp: float, V: PotentialSpec) -> float:
    """int Q^{4/(4-mu)} |u|^{4q/(4-mu)} dx / ||u||^{4q/(4-mu)}; finite for every u."""
    if not 0.0 < mu < 2.0:
        raise DomainError(f"mu must lie in (0, 2), got {mu}")
    if q_exp < (4.0 - mu) / 2.0:
        raise DomainError(f"q_exp must be at least (4-mu)/2 = {(4.0 - mu) / 2.0}")
    norm_sq = y_norm_sq(u, V)
    if norm_sq == 0.0:
        raise UsageError("embedding_ratio needs u that is not identically zero")
    power = 4.0 * q_exp / (4.0 - mu)
    qv = _potential_values(Q, u.grid) ** (4.0 / (4.0 - mu))
    num = float(np.dot(u.grid.measure(), qv * np.abs(u.values) ** power))
    return num / norm_sq ** (power / 2.0)


def radial_decay_ratio(u: RadialFunction, V: PotentialSpec, r0: float = 1.0) -> float:
    """sup_{r >= r0} |u(r)| r^{(a+2)/4} / ||u||, a = V's exponent at infinity; bounded on Y_rad."""
    norm = math.sqrt(y_norm_sq(u, V))
    if norm == 0.0:
        raise UsageError("radial_decay_ratio needs u that is not identically zero")
    r = u.grid.nodes
    sel = r >= r0
    if not np.any(sel):
        raise UsageError(f"grid does not reach r0={r0}")
    return float(np.max(np.abs(u.values[sel]) * r[sel] ** ((V.einf + 2.0) / 4.0)) / norm)

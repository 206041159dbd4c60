"""Riesz bilinear form D(g, h) = int int g(|x|) h(|y|) |x - y|^{-mu} dx dy for radial g, h.

Profiles are piecewise linear in r, and the kernel matrix is the exact
Galerkin form of D on the nodal hat basis:

    K_ij = int int psi_i(r) psi_j(s) r s 2 pi A_mu(r, s) dr ds,

so that D(g, h) = g^T K h for the piecewise-linear interpolants. On a
log-uniform grid every cell is a dilate of one reference cell, and
A_mu(lr, ls) = l^{-mu} A_mu(r, s), so each cell pair (c, d) reduces to
r_c^{4-mu} times a table entry that depends only on the offset d - c.
The tables are filled once by Gauss-Legendre rules: plain tensor rules for
separated cells, Duffy-type corner rules for touching cells and a graded
rule across the diagonal of the self cell, where the integrand carries the
|r - s|^{1-mu} (or log) singularity.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import DomainError, NumericError, UsageError
from .grid import RadialFunction, RadialGrid

FAR_POINTS = 10
CORNER_POINTS = (32, 24)
DIAG_POINTS = (40, 20)
CORNER_GRADING = 5


def _check_mu(mu: float) -> None:
    if not (isinstance(mu, (int, float, np.floating)) and 0.0 < mu < 2.0):
        raise DomainError(f"mu must lie in (0, 2), got {mu}")


def hls_constant(mu: float) -> float:
    """Sharp planar Hardy-Littlewood-Sobolev constant 2 pi^{mu/2} / (2 - mu)."""
    _check_mu(mu)
    return 2.0 * math.pi ** (mu / 2.0) / (2.0 - mu)


def _gauss(n: int, lo: float = 0.0, hi: float = 1.0):
    x, w = np.polynomial.legendre.leggauss(n)
    return lo + 0.5 * (hi - lo) * (x + 1.0), 0.5 * (hi - lo) * w


def _hats(x, q):
    """Left and right hat functions of the reference cell [1, q]."""
    right = (x - 1.0) / (q - 1.0)
    return np.stack([1.0 - right, right])


def _accumulate(rho, sigma, dist, weight, tau, q, mu):
    """sum weight * psi_a(rho) psi_b(tau) rho sigma 2 pi A(rho, sigma) for a, b in {0, 1}."""
    A = _kernels.angular_integral(rho, sigma, dist, mu)
    if not np.all(np.isfinite(A)):
        bad = int(np.flatnonzero(~np.isfinite(A))[0])
        raise NumericError(f"angular integral failed at rho={rho.ravel()[bad]:.17g}, sigma={sigma.ravel()[bad]:.17g}")
    base = (weight * rho * sigma * 2.0 * np.pi * A.reshape(rho.shape))
    ha, hb = _hats(rho, q), _hats(tau, q)
    if base.ndim == 1:
        return np.einsum("i,ai,bi->ab", base, ha, hb)
    return np.einsum("kij,akij,bkij->abk", base, ha, hb)


def _far_tables(q: float, offsets: np.ndarray, mu: float, npts: int = FAR_POINTS) -> np.ndarray:
    x, w = _gauss(npts, 1.0, q)
    scale = q ** offsets.astype(float)
    rho = np.broadcast_to(x[None, :, None], (offsets.size, npts, npts))
    tau = np.broadcast_to(x[None, None, :], (offsets.size, npts, npts))
    sigma = tau * scale[:, None, None]
    dist = np.abs(rho - sigma)
    weight = (w[:, None] * w[None, :])[None] * scale[:, None, None]
    return _accumulate(np.ascontiguousarray(rho), np.ascontiguousarray(sigma), dist, weight, tau, q, mu)


def _corner_table(q: float, k: int, mu: float) -> np.ndarray:
    # touching cells meet at P; rho = P -/+ alpha x, sigma = P +/- beta y, |rho - sigma| = alpha x + beta y
    if k == 1:
        P, alpha, beta, sgn = q, q - 1.0, q * (q - 1.0), 1.0
    else:
        P, alpha, beta, sgn = 1.0, q - 1.0, (q - 1.0) / q, -1.0
    nu, nt = CORNER_POINTS
    p = CORNER_GRADING
    uu, wu = _gauss(nu)
    tt, wt = _gauss(nt)
    U, T = np.meshgrid(uu, tt, indexing="ij")
    W = np.outer(wu, wt)
    lead = U**p
    jac = p * U ** (p - 1) * lead * W * alpha * beta
    out = np.zeros((2, 2))
    for x, y in ((lead, lead * T), (lead * T, lead)):
        rho = P - sgn * alpha * x
        sigma = P + sgn * beta * y
        dist = alpha * x + beta * y
        tau = sigma / q**k
        out += _accumulate(rho.ravel(), sigma.ravel(), dist.ravel(), jac.ravel(), tau.ravel(), q, mu)
    return out


def _diagonal_table(q: float, mu: float, points: tuple = DIAG_POINTS, grading: int | None = None) -> np.ndarray:
    # delta = |rho - sigma| = (q-1) v^p grades the points toward the diagonal singularity;
    # the cap keeps delta^2 clear of underflow at the smallest node
    nv, nt = points
    p = min(max(6, math.ceil(6.0 / (2.0 - mu))), 40) if grading is None else grading
    vv, wv = _gauss(nv)
    tt, wt = _gauss(nt)
    V, T = np.meshgrid(vv, tt, indexing="ij")
    W = np.outer(wv, wt)
    delta = (q - 1.0) * V**p
    span = q - 1.0 - delta
    low = 1.0 + span * T
    jac = p * (q - 1.0) * V ** (p - 1) * span * W
    out = np.zeros((2, 2))
    for rho, sigma in ((low + delta, low), (low, low + delta)):
        out += _accumulate(rho.ravel(), sigma.ravel(), delta.ravel(), jac.ravel(), sigma.ravel(), q, mu)
    return out


def cell_tables(q: float, n_cells: int, mu: float) -> np.ndarray:
    """Reference tables m[a, b, k + n_cells - 1] for offsets k in [-(n_cells-1), n_cells-1].

    m[a, b, k] = 2 pi int_1^q int_{q^k}^{q^{k+1}} psi_a(rho) psi_b(sigma/q^k) rho sigma A_mu(rho, sigma).
    """
    _check_mu(mu)
    if not q > 1.0:
        raise UsageError("cell ratio must exceed 1")
    offsets = np.arange(-(n_cells - 1), n_cells)
    tables = np.zeros((2, 2, offsets.size))
    far = np.abs(offsets) >= 2
    if np.any(far):
        tables[:, :, far] = _far_tables(q, offsets[far], mu)
    centre = n_cells - 1
    tables[:, :, centre] = _diagonal_table(q, mu)
    if n_cells > 1:
        tables[:, :, centre + 1] = _corner_table(q, 1, mu)
        tables[:, :, centre - 1] = _corner_table(q, -1, mu)
    if not np.all(np.isfinite(tables)) or np.any(tables < 0.0):
        bad = np.argwhere(~np.isfinite(tables) | (tables < 0.0))[0]
        raise NumericError(f"cell table entry (a={bad[0]}, b={bad[1]}, offset={offsets[bad[2]]}) is invalid")
    return tables


@dataclass(frozen=True, eq=False)
class RieszKernel:
    mu: float
    grid: RadialGrid
    K: np.ndarray = field(repr=False)

    def __post_init__(self):
        _check_mu(self.mu)
        K = np.asarray(self.K, dtype=float)
        if K.shape != (self.grid.n, self.grid.n):
            raise UsageError(f"kernel shape {K.shape} does not match the {self.grid.n}-node grid")
        K.setflags(write=False)
        object.__setattr__(self, "K", K)

    def _check(self, g: RadialFunction) -> np.ndarray:
        if g.grid != self.grid:
            raise UsageError("radial function does not live on the kernel grid")
        return g.values

    def apply(self, values: np.ndarray) -> np.ndarray:
        """K @ values for raw nodal arrays."""
        return self.K @ values

    def checksum(self) -> str:
        return hashlib.sha256(np.ascontiguousarray(self.K).tobytes()).hexdigest()


def assemble_kernel(grid: RadialGrid, mu: float, use_numba: bool | None = None) -> RieszKernel:
    """Galerkin matrix of D on the hat basis of a log-uniform grid."""
    _check_mu(mu)
    if not grid.log_uniform:
        raise UsageError("kernel assembly requires a log-uniform grid")
    n = grid.n
    tables = cell_tables(grid.ratio, n - 1, mu)
    r_left = grid.nodes[:-1]
    scale = r_left ** (4.0 - mu)
    K = _kernels.scatter_tables(tables, scale, n, use_numba=use_numba)
    K = 0.5 * (K + K.T)
    return RieszKernel(float(mu), grid, K)


def convolve(kernel: RieszKernel, g: RadialFunction) -> RadialFunction:
    """(|x|^{-mu} * g)(r_i) recovered from the Galerkin row sums (K g)_i / (2 pi w_i)."""
    vals = kernel._check(g)
    return g.with_values(kernel.apply(vals) / kernel.grid.measure())


def bilinear_D(kernel: RieszKernel, g: RadialFunction, h: RadialFunction) -> float:
    return float(kernel._check(g) @ kernel.apply(kernel._check(h)))


def lebesgue_norm(g: RadialFunction, p: float) -> float:
    """(int |g|^p dx)^{1/p} over the grid domain by nodal quadrature."""
    return float(np.dot(g.grid.measure(), np.abs(g.values) ** p) ** (1.0 / p))


def hls_ratio(kernel: RieszKernel, g: RadialFunction, h: RadialFunction) -> float:
    """D(g, h) / (C(mu) |g|_t |h|_t) with t = 4/(4 - mu); at most 1 up to discretization error."""
    t = 4.0 / (4.0 - kernel.mu)
    denom = hls_constant(kernel.mu) * lebesgue_norm(g, t) * lebesgue_norm(h, t)
    if denom == 0.0:
        raise UsageError("hls_ratio needs profiles that are not identically zero")
    return bilinear_D(kernel, g, h) / denom


# ---------------------------------------------------------------------------
# optional on-disk cache
# ---------------------------------------------------------------------------

def _cache_path(cache_dir, grid: RadialGrid, mu: float) -> Path:
    key = hashlib.sha256(f"{grid.fingerprint()}:{float(mu).hex()}".encode()).hexdigest()[:24]
    return Path(cache_dir) / f"riesz-{key}.npz"


def load_or_assemble(grid: RadialGrid, mu: float, cache_dir=None, verify: bool = False) -> RieszKernel:
    """Assemble the kernel, reusing a cached copy keyed by (grid hash, mu).

    A cached file is discarded when its key or checksum does not match, or,
    with ``verify=True``, when it is not bit-identical to a fresh assembly.
    """
    if cache_dir is None:
        return assemble_kernel(grid, mu)
    path = _cache_path(cache_dir, grid, mu)
    if path.exists():
        try:
            with np.load(path, allow_pickle=False) as data:
                ok = (str(data["grid"]) == grid.fingerprint() and float(data["mu"]) == float(mu))
                K = data["K"]
                ok = ok and hashlib.sha256(np.ascontiguousarray(K).tobytes()).hexdigest() == str(data["checksum"])
            if ok:
                cached = RieszKernel(float(mu), grid, K)
                if not verify:
                    return cached
                fresh = assemble_kernel(grid, mu)
                if np.array_equal(fresh.K, cached.K):
                    return cached
                return _store(path, fresh)
        except (OSError, KeyError, ValueError):
            pass
    return _store(path, assemble_kernel(grid, mu))


def _store(path: Path, kernel: RieszKernel) -> RieszKernel:
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez(path, K=kernel.K, grid=kernel.grid.fingerprint(), mu=kernel.mu, checksum=kernel.checksum())
    return kernel

"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports cleanly and the environment
variable ``CHOQUARD_DISABLE_NUMBA`` is unset (or set to ``0``/``false``).
Both paths compute the same quantities; the test-suite checks them
against each other and ``benchmarks/bench_kernels.py`` times them.
"""
from __future__ import annotations

import math
import os

import numpy as np
from scipy.special import gamma

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False


def _env_disabled() -> bool:
    return os.environ.get("CHOQUARD_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")


USE_NUMBA = _HAVE_NUMBA and not _env_disabled()

if _HAVE_NUMBA:
    jit = njit(cache=True, fastmath=False)
else:  # pragma: no cover
    def jit(func):
        return func


_EULER_GAMMA = 0.5772156649015329
_SERIES_EPS = 1e-17
_SERIES_MAX = 400
_BIG = 1.7976931348623157e308  # largest double; a partial sum above it is inf


# ---------------------------------------------------------------------------
# Angular integral A_mu(r, s) = int_0^{2pi} (r^2 + s^2 - 2 r s cos t)^{-mu/2} dt
#
# A = 2 pi (r+s)^{-mu} 2F1(mu/2, 1/2; 1; z),  z = 4 r s / (r+s)^2.
# For z > 1/2 the series is continued to w = 1 - z = (|r-s|/(r+s))^2, which is
# formed from the caller-supplied distance so it never loses digits.
# ---------------------------------------------------------------------------

def angular_coefficients(mu: float) -> tuple[float, float, float, bool]:
    """Connection coefficients for the w-expansion (g1, g2, e, log_case)."""
    a, b = 0.5 * mu, 0.5
    e = 0.5 * (1.0 - mu)
    if abs(e) < 1e-12:
        return 0.0, 0.0, 0.0, True
    g1 = gamma(e) / (gamma(1.0 - a) * gamma(1.0 - b))
    g2 = gamma(-e) / (gamma(a) * gamma(b))
    return float(g1), float(g2), e, False


@jit
def _hyp_series_scalar(a, b, c, x):
    term = 1.0
    total = 1.0
    for n in range(_SERIES_MAX):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * x
        total += term
        if abs(term) < _SERIES_EPS * abs(total):
            break
    return total


@jit
def _log_case_scalar(w):
    # 2F1(1/2, 1/2; 1; 1-w) = (1/pi) sum ((1/2)_n/n!)^2 [2 psi(n+1) - 2 psi(n+1/2) - ln w] w^n
    lw = math.log(w)
    psi1 = -_EULER_GAMMA
    psih = -_EULER_GAMMA - 2.0 * math.log(2.0)
    coef = 1.0
    wn = 1.0
    total = coef * (2.0 * psi1 - 2.0 * psih - lw)
    for n in range(1, _SERIES_MAX):
        coef *= ((n - 0.5) / n) ** 2
        psi1 += 1.0 / n
        psih += 1.0 / (n - 0.5)
        wn *= w
        term = coef * (2.0 * psi1 - 2.0 * psih - lw) * wn
        total += term
        if abs(term) < _SERIES_EPS * abs(total):
            break
    return total / math.pi


@jit
def _angular_numba(r, s, d, mu, g1, g2, e, log_case):
    out = np.empty(r.shape[0])
    a = 0.5 * mu
    for i in range(r.shape[0]):
        ssum = r[i] + s[i]
        w = (d[i] / ssum) ** 2
        if w >= 0.5:
            z = 4.0 * r[i] * s[i] / (ssum * ssum)
            f = _hyp_series_scalar(a, 0.5, 1.0, z)
        elif log_case:
            f = _log_case_scalar(w)
        else:
            f = g1 * _hyp_series_scalar(a, 0.5, 1.0 - e, w) + g2 * w ** e * _hyp_series_scalar(
                1.0 - a, 0.5, 1.0 + e, w
            )
        out[i] = 2.0 * math.pi * ssum ** (-mu) * f
    return out


def _hyp_series_numpy(a, b, c, x):
    term = np.ones_like(x)
    total = np.ones_like(x)
    for n in range(_SERIES_MAX):
        term = term * ((a + n) * (b + n) / ((c + n) * (n + 1.0))) * x
        total += term
        if not np.any(np.abs(term) >= _SERIES_EPS * np.abs(total)):
            break
    return total


def _log_case_numpy(w):
    lw = np.log(w)
    psi1 = -_EULER_GAMMA
    psih = -_EULER_GAMMA - 2.0 * math.log(2.0)
    coef = 1.0
    wn = np.ones_like(w)
    total = 2.0 * psi1 - 2.0 * psih - lw
    for n in range(1, _SERIES_MAX):
        coef *= ((n - 0.5) / n) ** 2
        psi1 += 1.0 / n
        psih += 1.0 / (n - 0.5)
        wn = wn * w
        term = coef * (2.0 * psi1 - 2.0 * psih - lw) * wn
        total += term
        if not np.any(np.abs(term) >= _SERIES_EPS * np.abs(total)):
            break
    return total / math.pi


def _angular_numpy(r, s, d, mu, g1, g2, e, log_case):
    ssum = r + s
    w = (d / ssum) ** 2
    f = np.empty_like(ssum)
    far = w >= 0.5
    if np.any(far):
        z = 4.0 * r[far] * s[far] / ssum[far] ** 2
        f[far] = _hyp_series_numpy(0.5 * mu, 0.5, 1.0, z)
    near = ~far
    if np.any(near):
        wn = w[near]
        if log_case:
            f[near] = _log_case_numpy(wn)
        else:
            a = 0.5 * mu
            f[near] = g1 * _hyp_series_numpy(a, 0.5, 1.0 - e, wn) + g2 * wn**e * _hyp_series_numpy(
                1.0 - a, 0.5, 1.0 + e, wn
            )
    return 2.0 * math.pi * ssum ** (-mu) * f


def angular_integral(r, s, d, mu: float, use_numba: bool | None = None) -> np.ndarray:
    """Evaluate A_mu(r, s) for arrays of radii; ``d`` must equal ``|r - s| > 0``."""
    r = np.ascontiguousarray(r, dtype=float).ravel()
    s = np.ascontiguousarray(s, dtype=float).ravel()
    d = np.ascontiguousarray(d, dtype=float).ravel()
    g1, g2, e, log_case = angular_coefficients(mu)
    numba_path = USE_NUMBA if use_numba is None else (use_numba and _HAVE_NUMBA)
    if numba_path:
        return _angular_numba(r, s, d, float(mu), g1, g2, e, log_case)
    return _angular_numpy(r, s, d, float(mu), g1, g2, e, log_case)


# ---------------------------------------------------------------------------
# Primitive of the model nonlinearity f(s) = lam s^p (e^{alpha s^2} - 1):
#   F(s) = lam sum_{k>=1} alpha^k s^{2k+p+1} / (k! (2k+p+1))
# All terms are positive, so the series has no cancellation for any s >= 0.
# ---------------------------------------------------------------------------

@jit
def _exp_primitive_numba(s, lam, p, alpha):
    out = np.zeros(s.shape[0])
    for i in range(s.shape[0]):
        x = s[i]
        if x <= 0.0:
            continue
        x2 = alpha * x * x
        base = x ** (p + 1.0)
        coef = 1.0
        total = 0.0
        for k in range(1, 100000):
            coef *= x2 / k
            term = coef / (2.0 * k + p + 1.0)
            total += term
            if total > _BIG:
                # the sum has left double range; F is infinite here
                total = np.inf
                break
            if term < _SERIES_EPS * total and k > x2:
                break
        out[i] = lam * base * total
    return out


def _exp_primitive_numpy(s, lam, p, alpha):
    out = np.zeros_like(s)
    pos = s > 0.0
    if not np.any(pos):
        return out
    x = s[pos]
    x2 = alpha * x * x
    coef = np.ones_like(x)
    total = np.zeros_like(x)
    live = np.ones(x.shape, dtype=bool)
    k = 0
    while np.any(live):
        k += 1
        with np.errstate(over="ignore"):
            coef[live] = coef[live] * x2[live] / k
        term = coef[live] / (2.0 * k + p + 1.0)
        total[live] += term
        done = (term < _SERIES_EPS * total[live]) & (k > x2[live])
        done |= total[live] > _BIG
        live[np.flatnonzero(live)[done]] = False
    total[total > _BIG] = np.inf
    with np.errstate(over="ignore"):
        out[pos] = lam * x ** (p + 1.0) * total
    return out


def exp_primitive(s, lam: float, p: float, alpha: float, use_numba: bool | None = None) -> np.ndarray:
    """F(s) for the exponential-critical family, zero for s <= 0."""
    s = np.ascontiguousarray(s, dtype=float)
    shape = s.shape
    flat = s.ravel()
    numba_path = USE_NUMBA if use_numba is None else (use_numba and _HAVE_NUMBA)
    if numba_path:
        out = _exp_primitive_numba(flat, float(lam), float(p), float(alpha))
    else:
        out = _exp_primitive_numpy(flat, float(lam), float(p), float(alpha))
    return out.reshape(shape)


# ---------------------------------------------------------------------------
# Scatter of the per-offset cell-pair tables into the dense Galerkin matrix.
#   K[i, j] = sum_{c in cells(i)} sum_{d in cells(j)} scale[c] * tables[a, b, d - c + nc - 1]
# with a = 0 when i == c (left end of cell c) and a = 1 when i == c + 1.
# ---------------------------------------------------------------------------

@jit
def _scatter_numba(tables, scale, n):
    nc = n - 1
    K = np.zeros((n, n))
    for c in range(nc):
        sc = scale[c]
        for d in range(nc):
            k = d - c + nc - 1
            K[c, d] += sc * tables[0, 0, k]
            K[c, d + 1] += sc * tables[0, 1, k]
            K[c + 1, d] += sc * tables[1, 0, k]
            K[c + 1, d + 1] += sc * tables[1, 1, k]
    return K


def _scatter_numpy(tables, scale, n):
    nc = n - 1
    K = np.zeros((n, n))
    offsets = np.arange(nc)[None, :] - np.arange(nc)[:, None] + (nc - 1)
    for a in (0, 1):
        for b in (0, 1):
            K[a:a + nc, b:b + nc] += scale[:, None] * tables[a, b][offsets]
    return K


def scatter_tables(tables, scale, n: int, use_numba: bool | None = None) -> np.ndarray:
    tables = np.ascontiguousarray(tables, dtype=float)
    scale = np.ascontiguousarray(scale, dtype=float)
    numba_path = USE_NUMBA if use_numba is None else (use_numba and _HAVE_NUMBA)
    if numba_path:
        return _scatter_numba(tables, scale, int(n))
    return _scatter_numpy(tables, scale, int(n))

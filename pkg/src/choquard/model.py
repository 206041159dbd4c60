"""Problem data: Riesz exponent, radial potentials V and Q, and the nonlinearity.

Also hosts the explicit constants used to bracket energy levels: the
weighted Trudinger-Moser threshold, the compactness threshold c0, the
Moser-sequence level bound and the xi constants for the (f3) route.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import _kernels
from .errors import ConfigurationError, DomainError, NumericError
from .grid import RadialGrid, build_log_grid, integrate


# ---------------------------------------------------------------------------
# potentials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PotentialSpec:
    """Radial weight w(r) > 0.

    ``form="power"`` is c r^{e0} for r <= 1 and c r^{einf} for r > 1;
    ``form="constant"`` is c; ``form="tabulated"`` interpolates
    (table_r, table_w) log-log and must declare its exponents.
    """

    role: str = "V"
    form: str = "power"
    coef: float = 1.0
    e0: float = 0.0
    einf: float = 0.0
    table_r: tuple = ()
    table_w: tuple = ()

    def __post_init__(self):
        if self.role not in ("V", "Q"):
            raise ConfigurationError(f"potential role must be 'V' or 'Q', got {self.role!r}")
        if self.form not in ("power", "constant", "tabulated"):
            raise ConfigurationError(f"unknown potential form {self.form!r}")
        if self.form == "tabulated":
            r = np.asarray(self.table_r, dtype=float)
            w = np.asarray(self.table_w, dtype=float)
            if r.size < 2 or r.shape != w.shape or np.any(r <= 0) or np.any(np.diff(r) <= 0):
                raise ConfigurationError("tabulated potential needs increasing positive radii and matching values")
            if np.any(w <= 0) or not np.all(np.isfinite(w)):
                raise ConfigurationError("tabulated potential values must be positive and finite")
        elif not (self.coef > 0.0 and math.isfinite(self.coef)):
            raise ConfigurationError(f"potential coefficient must be positive, got {self.coef}")
        if self.form == "constant":
            object.__setattr__(self, "e0", 0.0)
            object.__setattr__(self, "einf", 0.0)

    @classmethod
    def constant(cls, c: float = 1.0, role: str = "V") -> "PotentialSpec":
        return cls(role=role, form="constant", coef=c)

    @classmethod
    def power(cls, c: float, e0: float, einf: float, role: str = "V") -> "PotentialSpec":
        return cls(role=role, form="power", coef=c, e0=e0, einf=einf)

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.form == "constant":
            return np.full_like(r, self.coef)
        if self.form == "power":
            return self.coef * np.where(r <= 1.0, r ** self.e0, r ** self.einf)
        lr = np.log(np.asarray(self.table_r))
        lw = np.log(np.asarray(self.table_w))
        x = np.log(r)
        out = np.interp(x, lr, lw)
        # continue with the declared power laws outside the table
        out = np.where(x < lr[0], lw[0] + self.e0 * (x - lr[0]), out)
        out = np.where(x > lr[-1], lw[-1] + self.einf * (x - lr[-1]), out)
        return np.exp(out)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["table_r"] = list(self.table_r)
        d["table_w"] = list(self.table_w)
        return d


# ---------------------------------------------------------------------------
# nonlinearities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NonlinearitySpec:
    """f, its primitive F (F(0) = 0) and f', with the growth parameters.

    Evaluators act on numpy arrays. ``nonneg`` marks the convention
    f = F = 0 on s <= 0.
    """

    f: Callable
    F: Callable
    f_prime: Callable
    alpha0: float
    theta: float
    family: str = "custom"
    params: dict = field(default_factory=dict)
    nonneg: bool = True
    xi: float | None = None
    q_exp: float | None = None
    vartheta: float | None = None
    M0: float | None = None
    s0: float | None = None
    beta0: float | None = None

    def __post_init__(self):
        if not self.alpha0 > 0.0:
            raise ConfigurationError(f"alpha0 must be positive, got {self.alpha0}")
        if not self.theta > 1.0:
            raise ConfigurationError(f"theta must exceed 1, got {self.theta}")
        if self.xi is not None and not self.xi > 0.0:
            raise ConfigurationError("xi must be positive")
        if self.q_exp is not None and not self.q_exp > 1.0:
            raise ConfigurationError("q_exp must exceed 1")
        if self.vartheta is not None and not 0.0 < self.vartheta <= 1.0:
            raise ConfigurationError("vartheta must lie in (0, 1]")
        for name in ("M0", "s0", "beta0"):
            val = getattr(self, name)
            if val is not None and not val > 0.0:
                raise ConfigurationError(f"{name} must be positive")

    def with_params(self, **changes) -> "NonlinearitySpec":
        from dataclasses import replace
        return replace(self, **changes)

    def describe(self) -> dict:
        out = {"family": self.family, **self.params, "alpha0": self.alpha0, "theta": self.theta}
        for name in ("xi", "q_exp", "vartheta", "M0", "s0", "beta0"):
            val = getattr(self, name)
            if val is not None:
                out[name] = val
        return out


def exponential_critical(lam: float = 1.0, p: float = 2.0, alpha0: float = 4.0 * math.pi,
                         theta: float | None = None, theta_margin: float = 1e-3, **growth) -> NonlinearitySpec:
    """Model family f(s) = lam s^p (e^{alpha0 s^2} - 1) for s >= 0, zero for s < 0.

    F is the everywhere-convergent positive series
    lam sum_k alpha0^k s^{2k+p+1} / (k! (2k+p+1)). When ``theta`` is not
    given it is fitted as min s f(s)/F(s) over samples minus ``theta_margin``.
    """
    if not lam > 0.0:
        raise ConfigurationError("lam must be positive")
    if not p > -1.0:
        raise ConfigurationError("p must exceed -1")

    def f(s):
        s = np.asarray(s, dtype=float)
        sp = np.where(s > 0.0, s, 0.0)
        with np.errstate(over="ignore", invalid="ignore"):
            out = lam * sp**p * np.expm1(alpha0 * sp * sp)
        return np.where(s > 0.0, out, 0.0)

    def F(s):
        with np.errstate(over="ignore", invalid="ignore"):
            return _kernels.exp_primitive(s, lam, p, alpha0)

    def f_prime(s):
        s = np.asarray(s, dtype=float)
        sp = np.where(s > 0.0, s, 1.0)
        with np.errstate(over="ignore", invalid="ignore"):
            out = lam * (p * sp ** (p - 1.0) * np.expm1(alpha0 * sp * sp)
                         + 2.0 * alpha0 * sp ** (p + 1.0) * np.exp(alpha0 * sp * sp))
        return np.where(s > 0.0, out, 0.0)

    params = {"lam": lam, "p": p}
    if theta is None:
        probe = NonlinearitySpec(f, F, f_prime, alpha0, 2.0, "exp_critical", params)
        theta = fit_theta(probe) - theta_margin
    return NonlinearitySpec(f, F, f_prime, alpha0, theta, "exp_critical", params, **growth)


def pure_power(degree: float = 2.0, coef: float = 1.0) -> NonlinearitySpec:
    """F(s) = coef |s|^degree (even, not clipped). Used as a homogeneous oracle.

    ``alpha0`` is a placeholder: this family has no exponential growth.
    """
    if not degree > 1.0:
        raise ConfigurationError("degree must exceed 1")

    def F(s):
        return coef * np.abs(np.asarray(s, dtype=float)) ** degree

    def f(s):
        s = np.asarray(s, dtype=float)
        return coef * degree * np.sign(s) * np.abs(s) ** (degree - 1.0)

    def f_prime(s):
        return coef * degree * (degree - 1.0) * np.abs(np.asarray(s, dtype=float)) ** (degree - 2.0)

    return NonlinearitySpec(f, F, f_prime, alpha0=1.0, theta=degree, family="pure_power",
                            params={"degree": degree, "coef": coef}, nonneg=False)


def zero_nonlinearity() -> NonlinearitySpec:
    def zero(s):
        return np.zeros_like(np.asarray(s, dtype=float))
    return NonlinearitySpec(zero, zero, zero, alpha0=1.0, theta=2.0, family="zero", params={})


def fit_theta(nl: NonlinearitySpec, s_min: float = 1e-6, s_max: float = 4.0, samples: int = 2000) -> float:
    """Smallest observed s f(s) / F(s) on log-spaced samples (an (f2) constant)."""
    s = np.geomspace(s_min, s_max, samples)
    ratio = s * nl.f(s) / nl.F(s)
    ratio = ratio[np.isfinite(ratio)]
    if ratio.size == 0:
        raise NumericError("s f(s)/F(s) is not finite on any sample")
    return float(ratio.min())


# ---------------------------------------------------------------------------
# the problem
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProblemSpec:
    mu: float
    V: PotentialSpec
    Q: PotentialSpec
    f: NonlinearitySpec

    def __post_init__(self):
        if not 0.0 < self.mu < 2.0:
            raise DomainError(f"mu must lie in (0, 2), got {self.mu}")

    @property
    def b0(self) -> float:
        return self.Q.e0

    @property
    def hls_exponent(self) -> float:
        """Lebesgue exponent 4/(4 - mu) of the Hardy-Littlewood-Sobolev pairing."""
        return 4.0 / (4.0 - self.mu)


# ---------------------------------------------------------------------------
# admissibility of (V, Q)
# ---------------------------------------------------------------------------

@dataclass
class CheckEntry:
    name: str
    passed: bool
    detail: str = ""
    margin: float | None = None
    witness: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class AdmissibilityReport:
    entries: list

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def failures(self) -> list:
        return [e.name for e in self.entries if not e.passed]

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": [e.to_dict() for e in self.entries]}


def _bounded_near(r, ratio, inner_fraction=0.25, factor=10.0):
    """Ratio stays bounded as r shrinks: sup over the innermost quarter of the
    samples does not exceed ``factor`` times the sup over the rest."""
    k = max(1, int(len(r) * inner_fraction))
    order = np.argsort(r)
    inner, rest = ratio[order[:k]], ratio[order[k:]]
    ok = bool(np.all(np.isfinite(ratio)) and inner.max() <= factor * rest.max())
    i = int(np.argmax(ratio))
    return ok, float(r[i]), float(ratio[i])


def _below_bounded_from_zero(r, ratio, outer_fraction=0.25, factor=10.0):
    """Ratio stays away from 0: inf over the outer quarter of the samples is at
    least 1/``factor`` of the inf over the rest (and positive)."""
    k = max(1, int(len(r) * outer_fraction))
    order = np.argsort(r)[::-1]
    outer, rest = ratio[order[:k]], ratio[order[k:]]
    ok = bool(np.all(np.isfinite(ratio)) and outer.min() > 0.0 and outer.min() * factor >= rest.min())
    i = int(np.argmin(ratio))
    return ok, float(r[i]), float(ratio[i])


def check_admissible(spec: ProblemSpec, samples: int = 200, require_q_lower: bool = False,
                     r_small: float = 1e-8, r_large: float = 1e8) -> AdmissibilityReport:
    """Sampled and algebraic checks of (V0) and (Q0).

    Failures are report entries, never exceptions. Limits are probed on the
    windows [r_small, 1] and [1, r_large]; the windows are recorded in the
    entry details.
    """
    mu, V, Q = spec.mu, spec.V, spec.Q
    a0, a, b0, b = V.e0, V.einf, Q.e0, Q.einf
    entries = []

    entries.append(CheckEntry("(V0) a0 > -2", a0 > -2.0, f"a0={a0}", a0 + 2.0))
    entries.append(CheckEntry("(V0) a > -2", a > -2.0, f"a={a}", a + 2.0))
    lim_b0 = -(4.0 - mu) / 2.0
    entries.append(CheckEntry("(Q0) b0 > -(4-mu)/2", b0 > lim_b0, f"b0={b0}, bound={lim_b0}", b0 - lim_b0))
    lim_b = a * (4.0 - mu) / 4.0
    strict = b < lim_b
    detail = f"b={b}, a(4-mu)/4={lim_b}"
    if not strict and math.isclose(b, lim_b, rel_tol=0.0, abs_tol=1e-14):
        detail += " (borderline: equality, strict inequality required)"
    entries.append(CheckEntry("(Q0) b < a(4-mu)/4", strict, detail, lim_b - b))

    r_in = np.geomspace(r_small, 1.0, samples)
    r_out = np.geomspace(1.0, r_large, samples)
    window_in = f"r in [{r_small:g}, 1]"
    window_out = f"r in [1, {r_large:g}]"
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        v_in, v_out = V(r_in), V(r_out)
        q_in, q_out = Q(r_in), Q(r_out)
        pos = bool(np.all(v_in > 0) and np.all(v_out > 0))
        entries.append(CheckEntry("(V0) V > 0", pos, "sampled " + window_in + " and " + window_out))
        pos = bool(np.all(q_in > 0) and np.all(q_out > 0))
        entries.append(CheckEntry("(Q0) Q > 0", pos, "sampled " + window_in + " and " + window_out))

        ok, rw, val = _bounded_near(r_in, v_in / r_in**a0)
        entries.append(CheckEntry("(V0) limsup_{r->0} V/r^a0 < inf", ok, window_in + f"; sup {val:.6g}",
                                  None, [rw]))
        ok, rw, val = _below_bounded_from_zero(r_out, v_out / r_out**a)
        entries.append(CheckEntry("(V0) liminf_{r->inf} V/r^a > 0", ok, window_out + f"; inf {val:.6g}",
                                  None, [rw]))
        ok, rw, val = _bounded_near(r_in, q_in / r_in**b0)
        entries.append(CheckEntry("(Q0) limsup_{r->0} Q/r^b0 < inf", ok, window_in + f"; sup {val:.6g}",
                                  None, [rw]))
        ok, rw, val = _bounded_near(1.0 / r_out, q_out / r_out**b)
        entries.append(CheckEntry("(Q0) limsup_{r->inf} Q/r^b < inf", ok, window_out + f"; sup {val:.6g}",
                                  None, [1.0 / rw]))
        if require_q_lower:
            ok, rw, val = _below_bounded_from_zero(1.0 / r_in, q_in / r_in**b0)
            entries.append(CheckEntry("liminf_{r->0} Q/r^b0 > 0", ok, window_in + f"; inf {val:.6g}",
                                      None, [1.0 / rw]))
    return AdmissibilityReport(entries)


# ---------------------------------------------------------------------------
# explicit constants
# ---------------------------------------------------------------------------

def _check_mu_b0(mu: float, b0: float) -> None:
    if not 0.0 < mu < 2.0:
        raise DomainError(f"mu must lie in (0, 2), got {mu}")
    if not b0 > -(4.0 - mu) / 2.0:
        raise DomainError(f"tm_threshold: b0={b0} must exceed -(4-mu)/2={-(4.0 - mu) / 2.0}")


def tm_threshold(mu: float, b0: float) -> float:
    """Weighted Trudinger-Moser threshold 4 pi (1 + 2 b0/(4 - mu))."""
    _check_mu_b0(mu, b0)
    return 4.0 * math.pi * (1.0 + 2.0 * b0 / (4.0 - mu))


def moser_level_bound(mu: float, b0: float, alpha0: float) -> float:
    """Level bound ((4 - mu)/alpha0) (1 + 2 b0/(4 - mu)) pi/2 of the Moser route."""
    _check_mu_b0(mu, b0)
    if not alpha0 > 0.0:
        raise DomainError("alpha0 must be positive")
    return (4.0 - mu) / alpha0 * (1.0 + 2.0 * b0 / (4.0 - mu)) * math.pi / 2.0


def c0_threshold(mu: float, b0: float, alpha0: float, theta: float) -> float:
    """Compactness threshold c0 = ((4-mu)/alpha0)(1 + 2b0/(4-mu)) pi (theta-1)/(2 theta)."""
    if not theta > 1.0:
        raise DomainError(f"theta must exceed 1, got {theta}")
    return moser_level_bound(mu, b0, alpha0) * (theta - 1.0) / theta


def _l1_ball(w: PotentialSpec, radius: float, grid: RadialGrid, tail_rtol: float = 1e-6) -> float:
    sub = grid.truncated(radius)
    with np.errstate(over="ignore", divide="ignore"):
        vals = w(sub.nodes)
    if not np.all(np.isfinite(vals)):
        raise NumericError(f"{w.role} is not finite on the grid inside B_{radius:g}")
    value = integrate(sub.function(vals))
    # pinhole (0, r_min) is not integrated; bound it with the declared small-r exponent
    e0 = w.e0
    if e0 <= -2.0:
        raise NumericError(f"{w.role} is not integrable at the origin (exponent {e0} <= -2)")
    tail = 2.0 * math.pi * float(w(np.array([sub.r_min]))[0]) * sub.r_min**2 / (e0 + 2.0)
    if tail > tail_rtol * abs(value):
        raise NumericError(f"||{w.role}||_L1(B_{radius:g}): pinhole r < {sub.r_min:g} carries {tail:.3g}, "
                           f"more than {tail_rtol:g} of the computed {value:.6g}; lower r_min")
    return value


def xi1_constant(V: PotentialSpec, Q: PotentialSpec, grid: RadialGrid | None = None) -> float:
    """xi_1 = sqrt(pi + ||V||_{L1(B_1)}) / ||Q||_{L1(B_{1/2})} by grid quadrature."""
    if grid is None:
        grid = build_log_grid(1e-6, 1.0, 2048)
    v1 = _l1_ball(V, 1.0, grid)
    q_half = _l1_ball(Q, 0.5, grid)
    return math.sqrt(math.pi + v1) / q_half


def xi_requirement(mu: float, b0: float, alpha0: float, theta: float, q_exp: float,
                   V: PotentialSpec, Q: PotentialSpec, grid: RadialGrid | None = None) -> float:
    """Lower bound on xi in (f3) that forces the mountain-pass level below c0.

    max{xi_1, [ (||Q||^2/2)(q-1)(xi_1^2/q)^{q/(q-1)} / c0 ]^{(q-1)/2}} with
    ||Q|| = ||Q||_{L1(B_{1/2})}.
    """
    if not q_exp > 1.0:
        raise DomainError(f"q_exp must exceed 1, got {q_exp}")
    if grid is None:
        grid = build_log_grid(1e-6, 1.0, 2048)
    xi1 = xi1_constant(V, Q, grid)
    q_norm = _l1_ball(Q, 0.5, grid)
    c0 = c0_threshold(mu, b0, alpha0, theta)
    q = q_exp
    numer = 0.5 * q_norm**2 * (q - 1.0) * (xi1**2 / q) ** (q / (q - 1.0))
    second = (numer / c0) ** ((q - 1.0) / 2.0)
    return max(xi1, second)


# ---------------------------------------------------------------------------
# growth conditions
# ---------------------------------------------------------------------------

@dataclass
class GrowthReport:
    entries: list
    mandatory: tuple = ()

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries if e.name in self.mandatory)

    def entry(self, name: str) -> CheckEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "mandatory": list(self.mandatory),
                "checks": [e.to_dict() for e in self.entries]}


def check_growth(nl: NonlinearitySpec, mu: float, samples: int = 400, s_max: float = 4.0,
                 tail_window: tuple = (2.0, 4.0), alpha_offset: float = 0.1) -> GrowthReport:
    """Sampled checks of (f1)-(f5) and the alpha0-critical-growth definition.

    Limits are probed on finite windows that are stated in each entry; a
    sampled check can refute a limit but not certify it. (f1), (f2), the
    critical-growth probe and f >= 0 are mandatory; (f3), (f4), (f5) become
    mandatory when their parameters are declared.
    """
    s = np.geomspace(1e-6, s_max, samples)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        fs, Fs = nl.f(s), nl.F(s)
    entries = []
    mandatory = ["f >= 0", "F(0) = 0, F' = f", "(f1)", "(f2)", "critical growth"]

    neg = s[fs < 0]
    entries.append(CheckEntry("f >= 0", neg.size == 0, f"s in [1e-6, {s_max:g}]",
                              float(fs.min()), [float(x) for x in neg[:3]]))

    # F(0) = 0 and F' = f by central differences
    F0 = float(nl.F(np.array([0.0]))[0])
    sc = np.geomspace(1e-2, min(s_max, 2.0), 40)
    h = 1e-5 * sc
    with np.errstate(over="ignore", invalid="ignore"):
        dF = (nl.F(sc + h) - nl.F(sc - h)) / (2.0 * h)
        ref = nl.f(sc)
        rel = np.abs(dF - ref) / np.maximum(np.abs(ref), 1e-300)
    worst = int(np.nanargmax(rel)) if np.any(np.isfinite(rel)) else 0
    ok = F0 == 0.0 and bool(np.all(np.isfinite(rel))) and float(np.max(rel)) < 1e-6
    entries.append(CheckEntry("F(0) = 0, F' = f", ok, f"F(0)={F0}; s in [1e-2, {sc[-1]:g}]",
                              float(np.max(rel)) if ok else None, [float(sc[worst])]))

    # (f1): f(s)/s^{(2-mu)/2} -> 0 as s -> 0+, probed on [1e-6, 1e-3]
    small = s[s <= 1e-3]
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = nl.f(small) / small ** ((2.0 - mu) / 2.0)
    ok = bool(np.all(np.isfinite(ratio)) and ratio[0] <= ratio[-1] and ratio[0] < 1e-3)
    entries.append(CheckEntry("(f1)", ok, f"f/s^((2-mu)/2) on [1e-6, 1e-3]: {ratio[0]:.3g} -> {ratio[-1]:.3g}",
                              float(ratio[0]), [float(small[0])]))

    # (f2): theta F <= f s
    with np.errstate(invalid="ignore"):
        gap = fs * s - nl.theta * Fs
    finite = np.isfinite(gap)
    scale = np.maximum(np.abs(fs * s), 1e-300)
    rel_gap = np.where(finite, gap / scale, -np.inf)
    i = int(np.argmin(rel_gap))
    ok = bool(np.all(finite) and np.all(gap >= -1e-14 * scale))
    entries.append(CheckEntry("(f2)", ok, f"theta={nl.theta:.12g}, s in [1e-6, {s_max:g}]",
                              float(rel_gap[i]), [float(s[i])]))

    # critical growth: f(s)/e^{alpha s^2} decreasing for alpha > alpha0, increasing below
    st = np.linspace(*tail_window, 50)
    a_hi = nl.alpha0 * (1.0 + alpha_offset)
    a_lo = nl.alpha0 * (1.0 - alpha_offset)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        lf = np.log(nl.f(st))
        hi = lf - a_hi * st**2
        lo = lf - a_lo * st**2
    ok = bool(np.all(np.isfinite(hi)) and np.all(np.diff(hi) < 0) and np.all(np.diff(lo) > 0))
    entries.append(CheckEntry("critical growth", ok,
                              f"log f - alpha s^2 on s in [{tail_window[0]:g}, {tail_window[1]:g}], "
                              f"alpha = alpha0 (1 -/+ {alpha_offset:g})"))

    # (f3): F(s) >= xi s^q on [0, 1]
    if nl.xi is not None and nl.q_exp is not None:
        mandatory.append("(f3)")
        su = np.geomspace(1e-6, 1.0, samples)
        with np.errstate(invalid="ignore"):
            margin = nl.F(su) - nl.xi * su**nl.q_exp
        i = int(np.argmin(margin))
        entries.append(CheckEntry("(f3)", bool(np.all(margin >= 0)),
                                  f"xi={nl.xi}, q={nl.q_exp}, s in [1e-6, 1]", float(margin[i]), [float(su[i])]))
    else:
        entries.append(CheckEntry("(f3)", False, "not declared (xi, q_exp missing)"))

    # (f4): 0 < s^vartheta F(s) <= M0 f(s) for s >= s0
    if None not in (nl.vartheta, nl.M0, nl.s0):
        mandatory.append("(f4)")
        s4 = np.linspace(nl.s0, max(s_max, nl.s0 * 2.0), samples)
        with np.errstate(over="ignore", invalid="ignore"):
            lhs = s4**nl.vartheta * nl.F(s4)
            rhs = nl.M0 * nl.f(s4)
        finite = np.isfinite(lhs) & np.isfinite(rhs)
        ok = bool(np.all(finite) and np.all(lhs > 0) and np.all(lhs <= rhs))
        rel = np.where(finite, (rhs - lhs) / np.maximum(rhs, 1e-300), -np.inf)
        i = int(np.argmin(rel))
        entries.append(CheckEntry("(f4)", ok, f"vartheta={nl.vartheta}, M0={nl.M0}, s in [{nl.s0:g}, {s4[-1]:g}]",
                                  float(rel[i]), [float(s4[i])]))
    else:
        entries.append(CheckEntry("(f4)", False, "not declared (vartheta, M0, s0 missing)"))

    # (f5): liminf F(s)/e^{alpha0 s^2} =: beta0 > 0, probed on the tail window
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        tail_ratio = nl.F(st) / np.exp(nl.alpha0 * st**2)
    est = float(np.min(tail_ratio)) if np.all(np.isfinite(tail_ratio)) else float("nan")
    ok5 = bool(np.isfinite(est) and est > 0.0 and tail_ratio[-1] >= 0.5 * tail_ratio[0])
    detail = f"inf of F/e^(alpha0 s^2) on s in [{tail_window[0]:g}, {tail_window[1]:g}] = {est:.6g}"
    if nl.beta0 is not None:
        mandatory.append("(f5)")
        ok5 = ok5 and est >= nl.beta0
        detail += f"; declared beta0={nl.beta0}"
    entries.append(CheckEntry("(f5)", ok5, detail, est))
    return GrowthReport(entries, tuple(mandatory))

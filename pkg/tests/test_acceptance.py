"""Acceptance criteria, each at its stated tolerance and runtime budget.

Every test prints one ``criterion N PASS|FAIL`` line; the lines are also
collected and repeated in the pytest terminal summary. Timings include all
setup a criterion needs (kernel assembly, solves), so nothing is borrowed
from session fixtures.

    python3 -m pytest tests/test_acceptance.py -v
"""
import json
import math
import time

import numpy as np
import pytest

from choquard import cli, model, moser, solver
from choquard.config import load_config
from choquard.energy import EnergyFunctional, fibering_maximize, y_norm_sq
from choquard.grid import build_log_grid
from choquard.model import PotentialSpec, ProblemSpec, exponential_critical
from choquard.riesz import assemble_kernel, convolve, hls_ratio

from conftest import CONSTANTS_REFERENCE, SHIPPED
from helpers import golden_section_t_star, homogeneous_setup, random_profile, random_smooth_profile

RESULTS = {}


def report(number, title, ok, detail, elapsed, budget):
    passed = bool(ok) and elapsed < budget
    line = (f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}; "
            f"runtime {elapsed:.2f} s (budget {budget:g} s)")
    RESULTS[number] = line
    print(line)
    assert ok, line
    assert elapsed < budget, line


def test_criterion_01_moser_gradient_identity():
    t0 = time.perf_counter()
    grid = build_log_grid(1e-6, 50.0, 2048)
    errs = {n: abs(moser.moser_grad_check(n, grid) - 1.0) for n in (10, 100, 1000)}
    elapsed = time.perf_counter() - t0
    detail = ", ".join(f"n={n}: |err|={e:.2e}" for n, e in errs.items())
    report(1, "Moser gradient identity", max(errs.values()) < 1e-3, detail, elapsed, 1.0)


def test_criterion_02_delta_n_limit():
    t0 = time.perf_counter()
    gaps, majorized = [], True
    for a0, M1 in ((0.0, 1.0), (1.0, 1.0)):
        n = 10**6
        gaps.append(abs(moser.delta_n_closed_form(n, a0, M1) * math.log(n) - 2 * M1 / (a0 + 2) ** 3))
        V = PotentialSpec.power(M1, a0, a0)
        for n in (2, 3, 5, 10, 30, 100, 300, 1000, 3000, 10**4):
            majorized &= moser.moser_I_numeric(n, V) <= moser.delta_n_closed_form(n, a0, M1)
    elapsed = time.perf_counter() - t0
    report(2, "delta_n limit and I_n <= delta_n", max(gaps) < 1e-3 and majorized,
           f"max |delta_n log n - 2M1/(a0+2)^3| = {max(gaps):.2e}, I_n <= delta_n: {majorized}", elapsed, 5.0)


def test_criterion_03_riesz_disc_convolution():
    t0 = time.perf_counter()
    grid = build_log_grid(1e-6, 1.0, 2048)
    ones = grid.function(np.ones(grid.n))
    errs = {}
    for mu in (1.0, 0.5):
        val = convolve(assemble_kernel(grid, mu), ones).values[0]
        errs[mu] = abs(val / (2 * math.pi / (2 - mu)) - 1.0)
    elapsed = time.perf_counter() - t0
    detail = ", ".join(f"mu={mu}: rel err {e:.2e}" for mu, e in errs.items())
    report(3, "Riesz convolution of the unit-disc indicator", max(errs.values()) < 1e-3, detail, elapsed, 30.0)


def test_criterion_04_hls_conformance():
    t0 = time.perf_counter()
    grid = build_log_grid(1e-6, 50.0, 1024)
    worst = {}
    for mu in (0.5, 1.0, 1.5):
        kernel = assemble_kernel(grid, mu)
        rng = np.random.default_rng(42)
        worst[mu] = max(hls_ratio(kernel, random_profile(grid, rng), random_profile(grid, rng)) for _ in range(200))
    elapsed = time.perf_counter() - t0
    detail = ", ".join(f"mu={mu}: max ratio {w:.6f}" for mu, w in worst.items())
    report(4, "HLS conformance over 200 profiles x 3 mu", max(worst.values()) <= 1 + 5e-3, detail, elapsed, 120.0)


def test_criterion_05_gradient_correctness():
    t0 = time.perf_counter()
    cfg = load_config(SHIPPED)
    grid = cfg.grid()
    E = EnergyFunctional(cfg.problem, assemble_kernel(grid, cfg.problem.mu))
    rng = np.random.default_rng(42)
    h = 1e-5
    worst = 0.0
    for _ in range(50):
        u = random_smooth_profile(grid, rng).values
        phi = random_smooth_profile(grid, rng).values
        fd = (E.J(u + h * phi) - E.J(u - h * phi)) / (2 * h)
        exact = E.directional(u, phi)
        worst = max(worst, abs(fd - exact) / abs(exact))
    elapsed = time.perf_counter() - t0
    report(5, "J' against central differences on 50 profiles", worst < 1e-5, f"max rel err {worst:.2e}", elapsed,
           60.0)


def test_criterion_06_fibering_closed_form():
    t0 = time.perf_counter()
    small = build_log_grid(1e-4, 20.0, 256)
    small_kernel = assemble_kernel(small, 1.0)
    errs = []
    for A, t_exact in ((1.0, 0.5), (4.0, 1.0)):
        u, spec = homogeneous_setup(small, small_kernel, A, 1.0)
        errs.append(abs(fibering_maximize(u, spec, small_kernel)[0] - t_exact))
    cfg = load_config(SHIPPED)
    grid = cfg.grid()
    kernel = assemble_kernel(grid, cfg.problem.mu)
    u = grid.sample(lambda r: np.exp(-r**2))
    t, _ = fibering_maximize(u, cfg.problem, kernel)
    gs_err = abs(t - golden_section_t_star(u, cfg.problem, kernel, t))
    elapsed = time.perf_counter() - t0
    report(6, "fibering maximizer", max(errs) < 1e-8 and gs_err < 1e-8,
           f"homogeneous |t - sqrt(A/(4 I2))| max {max(errs):.1e}, shipped |t - golden section| {gs_err:.1e}",
           elapsed, 10.0)


def test_criterion_07_ground_state_run():
    t0 = time.perf_counter()
    cfg = load_config(SHIPPED)
    spec, grid = cfg.problem, cfg.grid()
    kernel = assemble_kernel(grid, spec.mu)
    init = solver.gaussian_profile(grid, V=spec.V)
    sol = solver.solve_ground_state(spec, grid, kernel, init, tol=cfg.tol, max_iter=cfg.max_iter, seed=cfg.seed)
    elapsed = time.perf_counter() - t0
    norm_sq = sol.energy.norm_sq
    nehari_ok = abs(sol.nehari_residual) < 1e-8 * norm_sq
    ps_ok = norm_sq <= 2 * sol.theta / (sol.theta - 1) * sol.energy.J * (1 + 1e-6)
    ok = sol.converged and sol.residual_norm < 1e-6 and sol.iterations < 5000 and sol.energy.J > 0 and nehari_ok \
        and ps_ok
    detail = (f"residual {sol.residual_norm:.2e} after {sol.iterations} iterations, J(u*) = {sol.energy.J:.8f}, "
              f"|nehari|/||u||^2 = {abs(sol.nehari_residual) / norm_sq:.1e}, PS bound {ps_ok} (theta {sol.theta:.4f})")
    report(7, "ground-state run on the shipped problem", ok, detail, elapsed, 600.0)


def test_criterion_08_level_thresholds(tmp_path, capsys):
    t0 = time.perf_counter()
    code = cli.main(["constants", "--config", str(CONSTANTS_REFERENCE), "--out", str(tmp_path)])
    c = json.loads((tmp_path / "constants.json").read_text())
    elapsed = time.perf_counter() - t0
    capsys.readouterr()
    xi1_exact = 4 * math.sqrt(2 * math.pi) / math.pi
    ok = (code == 0 and math.isclose(c["c0"], 0.1875, rel_tol=1e-12)
          and math.isclose(c["moser_level_bound"], 0.375, rel_tol=1e-12) and abs(c["xi1"] - xi1_exact) < 1e-5)
    report(8, "level thresholds via the constants command", ok,
           f"c0 = {c['c0']:.12g}, bound = {c['moser_level_bound']:.12g}, xi1 = {c['xi1']:.8f} "
           f"(exact {xi1_exact:.8f})", elapsed, 1.0)


def test_criterion_09_tm_threshold_bracketing():
    t0 = time.perf_counter()
    spec = ProblemSpec(1.0, PotentialSpec.constant(1.0), PotentialSpec.constant(1.0, role="Q"),
                       exponential_critical())
    assert model.tm_threshold(1.0, 0.0) == pytest.approx(4 * math.pi)
    grid = build_log_grid(1e-6, 50.0, 1024)
    n_list = [10, 100, 1000, 10000]
    below = moser.growth_indicator(moser.tm_probe(spec, grid, 2 * math.pi, n_list))
    above = moser.growth_indicator(moser.tm_probe(spec, grid, 6 * math.pi, n_list))
    elapsed = time.perf_counter() - t0
    report(9, "Trudinger-Moser threshold bracketing", below < 2 and above > 10,
           f"growth indicator {below:.4f} at 2 pi, {above:.1f} at 6 pi", elapsed, 60.0)


def test_criterion_10_mountain_pass_geometry():
    t0 = time.perf_counter()
    cfg = load_config(SHIPPED)
    spec, grid = cfg.problem, cfg.grid()
    E = EnergyFunctional(spec, assemble_kernel(grid, spec.mu))
    u = grid.sample(lambda r: np.exp(-r**2))
    u_hat = (u * (1 / math.sqrt(y_norm_sq(u, spec.V)))).values
    rho = [r for r in np.geomspace(1e-3, 0.5, 20) if E.J(r * u_hat) > 0]
    t_big = [t for t in np.linspace(1.0, 4.0, 31) if E.J(t * u_hat) < 0]
    elapsed = time.perf_counter() - t0
    detail = (f"J(rho u) > 0 for {len(rho)}/20 sampled rho, first t_big = {t_big[0]:.2f} with "
              f"J = {E.J(t_big[0] * u_hat):.4f}" if t_big else "no t_big with J < 0")
    report(10, "mountain-pass geometry", bool(rho) and bool(t_big), detail, elapsed, 10.0)

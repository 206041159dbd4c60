import json
import math
from pathlib import Path

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from choquard.errors import DomainError, UsageError
from choquard.grid import RadialGrid, build_log_grid
from choquard.riesz import (RieszKernel, assemble_kernel, bilinear_D, cell_tables, convolve, hls_constant,
                            hls_ratio, lebesgue_norm, load_or_assemble)
from helpers import random_profile

ORACLES = Path(__file__).parent / "oracles"

# Monte-Carlo estimate of D(1_B1, 1_B1) at mu = 1 from tests/oracles/gen_mc_disc.py (10^7 seeded pairs)
MC_DISC_MEAN = 16.74239462128612
MC_DISC_SIGMA = 0.011150569479016784


def test_cell_tables_match_mpmath_oracle():
    data = json.loads((ORACLES / "cell_tables.json").read_text())
    tables = {}
    worst = 0.0
    for e in data["entries"]:
        mu = e["mu"]
        if mu not in tables:
            tables[mu] = cell_tables(data["q"], 5, mu)
        val = tables[mu][e["a"], e["b"], e["offset"] + 4]
        worst = max(worst, abs(val / float(e["value"]) - 1.0))
    assert worst < 1e-12


def test_cell_tables_refinement_near_mu_two():
    # the mpmath oracle does not converge at mu = 1.9; check the diagonal rule against a refined rule
    from choquard import riesz
    q = build_log_grid(1e-6, 50.0, 1024).ratio
    base = riesz._diagonal_table(q, 1.9)
    fine = riesz._diagonal_table(q, 1.9, points=(120, 40), grading=10)
    assert np.max(np.abs(base / fine - 1.0)) < 1e-12


def test_kernel_invariants(small_kernel):
    K = small_kernel.K
    assert np.max(np.abs(K - K.T)) == 0.0
    assert np.all(np.isfinite(K)) and np.all(K >= 0.0)
    assert np.all(np.diag(K) > 0.0)


@pytest.mark.parametrize("mu", [0.0, 2.0, 2.5, -0.5])
def test_assemble_rejects_mu(mu):
    with pytest.raises(DomainError):
        assemble_kernel(build_log_grid(1e-3, 1.0, 32), mu)


def test_assemble_needs_log_grid():
    grid = RadialGrid.from_nodes(np.linspace(0.1, 1.0, 32))
    with pytest.raises(UsageError):
        assemble_kernel(grid, 1.0)


def test_dilation_scaling_two_point_profile():
    # D scales like lambda^{4 - mu} = lambda^3 at mu = 1 for fixed nodal values
    grid = build_log_grid(1e-3, 2.0, 64)
    values = np.zeros(64)
    values[[30, 31]] = (1.0, 0.5)
    lam = 3.7
    d1 = bilinear_D(assemble_kernel(grid, 1.0), grid.function(values), grid.function(values))
    big = grid.scaled(lam)
    d2 = bilinear_D(assemble_kernel(big, 1.0), big.function(values), big.function(values))
    assert d2 / d1 == pytest.approx(lam**3, rel=1e-12)


@pytest.mark.parametrize("mu", [0.5, 1.0, 1.5])
def test_dilation_homogeneity(mu):
    grid = build_log_grid(1e-5, 30.0, 512)
    lam = 0.37
    g = grid.sample(lambda r: np.exp(-r**2))
    small = grid.scaled(lam)
    g_lam = small.sample(lambda r: np.exp(-(r / lam) ** 2))
    d = bilinear_D(assemble_kernel(grid, mu), g, g)
    d_lam = bilinear_D(assemble_kernel(small, mu), g_lam, g_lam)
    assert d_lam / d == pytest.approx(lam ** (4 - mu), rel=1e-3)


def test_convolve_zero(small_kernel, small_grid):
    out = convolve(small_kernel, small_grid.function(np.zeros(small_grid.n)))
    assert np.all(out.values == 0.0)


@pytest.mark.parametrize("mu", [1.0, 0.5])
def test_convolve_disc_indicator_at_origin(unit_disc_kernels, mu):
    kernel = unit_disc_kernels[mu]
    g = kernel.grid.function(np.ones(kernel.grid.n))
    val = convolve(kernel, g).values[0]
    exact = 2 * math.pi / (2 - mu)
    assert abs(val / exact - 1) < 1e-3


def test_convolve_disc_indicator_profile(unit_disc_kernels):
    # (|x|^{-1} * 1_B1)(r) = 4 E(r^2) with E the complete elliptic integral of the second kind
    kernel = unit_disc_kernels[1.0]
    grid = kernel.grid
    out = convolve(kernel, grid.function(np.ones(grid.n)))
    for i in (0, 500, 1000, 1500, 1900):
        r = grid.nodes[i]
        ref = 4 * float(mp.ellipe(r * r))
        assert out.values[i] == pytest.approx(ref, rel=1e-3)


def test_convolve_grid_mismatch(small_kernel):
    other = build_log_grid(1e-4, 21.0, 256)
    with pytest.raises(UsageError):
        convolve(small_kernel, other.function(np.ones(256)))


def test_convolve_positive(small_kernel, small_grid):
    rng = np.random.default_rng(5)
    for _ in range(20):
        g = random_profile(small_grid, rng)
        assert np.all(convolve(small_kernel, g).values >= 0.0)


def test_disc_self_energy_monte_carlo(unit_disc_kernels):
    kernel = unit_disc_kernels[1.0]
    one = kernel.grid.function(np.ones(kernel.grid.n))
    val = bilinear_D(kernel, one, one)
    assert abs(val - MC_DISC_MEAN) < 3 * MC_DISC_SIGMA


def test_disc_self_energy_analytic(unit_disc_kernels):
    # 2 pi int_0^1 4 E(r^2) r dr = 16 pi / 3
    kernel = unit_disc_kernels[1.0]
    one = kernel.grid.function(np.ones(kernel.grid.n))
    exact = float(2 * mp.pi * mp.quad(lambda r: 4 * mp.ellipe(r * r) * r, [0, 1]))
    assert exact == pytest.approx(16 * math.pi / 3, rel=1e-14)
    assert bilinear_D(kernel, one, one) == pytest.approx(exact, rel=1e-9)


def test_bilinear_symmetry_and_positivity(small_kernel, small_grid):
    rng = np.random.default_rng(11)
    for _ in range(10):
        g = small_grid.function(rng.normal(size=small_grid.n))
        h = small_grid.function(rng.normal(size=small_grid.n))
        a, b = bilinear_D(small_kernel, g, h), bilinear_D(small_kernel, h, g)
        assert abs(a - b) <= 1e-13 * max(abs(a), 1.0)
        p = random_profile(small_grid, rng)
        assert bilinear_D(small_kernel, p, p) >= 0.0


def test_bilinear_is_bilinear(small_kernel, small_grid):
    rng = np.random.default_rng(2)
    g, h, k = (small_grid.function(rng.uniform(size=small_grid.n)) for _ in range(3))
    lhs = bilinear_D(small_kernel, 2.0 * g + h, k)
    rhs = 2.0 * bilinear_D(small_kernel, g, k) + bilinear_D(small_kernel, h, k)
    assert lhs == pytest.approx(rhs, rel=1e-13)


def test_hls_constant():
    assert hls_constant(1.0) == pytest.approx(2 * math.sqrt(math.pi), rel=1e-15)
    assert hls_constant(1.0) == pytest.approx(3.54491, abs=1e-5)
    with pytest.raises(DomainError):
        hls_constant(2.0)


def test_hls_ratio_homogeneous(small_kernel, small_grid):
    rng = np.random.default_rng(9)
    g, h = random_profile(small_grid, rng), random_profile(small_grid, rng)
    assert hls_ratio(small_kernel, 3.5 * g, h) == pytest.approx(hls_ratio(small_kernel, g, h), rel=1e-13)
    with pytest.raises(UsageError):
        hls_ratio(small_kernel, small_grid.function(np.zeros(small_grid.n)), h)


def test_hls_ratio_gaussian(shipped_kernel, shipped_grid):
    g = shipped_grid.sample(lambda r: np.exp(-r**2))
    ratio = hls_ratio(shipped_kernel, g, g)
    assert 0.0 < ratio <= 1.0
    # closed form: D = pi^{5/2}/sqrt(2), |g|_{4/3} = (3 pi / 4)^{3/4}
    exact = math.pi**2.5 / math.sqrt(2) / (hls_constant(1.0) * (3 * math.pi / 4) ** 1.5)
    assert ratio == pytest.approx(exact, rel=2e-4)
    assert ratio == pytest.approx(0.9647413205034547, rel=1e-9)  # regression lock


@pytest.mark.parametrize("mu", [0.5, 1.0, 1.5])
def test_hls_extremizer_nearly_attains(mu):
    # (1 + r^2)^{-(4 - mu)/2} is the optimizer of the diagonal inequality, so the ratio tends to 1
    grid = build_log_grid(1e-4, 1e3, 2048)
    kernel = assemble_kernel(grid, mu)
    h = grid.sample(lambda r: (1 + r * r) ** (-(4 - mu) / 2))
    ratio = hls_ratio(kernel, h, h)
    assert 1 - 5e-5 < ratio <= 1.0


@pytest.mark.parametrize("mu", [0.5, 1.0, 1.5])
def test_hls_random_profiles(mu):
    grid = build_log_grid(1e-6, 50.0, 1024)
    kernel = assemble_kernel(grid, mu)
    rng = np.random.default_rng(42)
    worst = max(hls_ratio(kernel, random_profile(grid, rng), random_profile(grid, rng)) for _ in range(200))
    assert worst <= 1 + 5e-3


def test_lebesgue_norm():
    grid = build_log_grid(1e-6, 1.0, 2048)
    one = grid.function(np.ones(grid.n))
    assert lebesgue_norm(one, 4 / 3) == pytest.approx(math.pi ** 0.75, rel=1e-10)


def test_kernel_refinement_gaussian():
    vals = []
    for n in (1024, 2048):
        grid = build_log_grid(1e-6, 50.0, n)
        g = grid.sample(lambda r: np.exp(-r**2))
        vals.append(bilinear_D(assemble_kernel(grid, 1.0), g, g))
    assert abs(vals[1] / vals[0] - 1) < 1e-3


def test_gaussian_self_energy_closed_form():
    # D(e^{-r^2}, e^{-r^2}) at mu = 1 is pi^{5/2}/sqrt(2) (change of variables to x - y, x + y)
    exact = math.pi**2.5 / math.sqrt(2.0)
    errs = []
    for n in (2048, 4096):
        grid = build_log_grid(1e-6, 12.0, n)
        g = grid.sample(lambda r: np.exp(-r**2))
        errs.append(abs(bilinear_D(assemble_kernel(grid, 1.0), g, g) / exact - 1))
    assert errs[1] < 1e-5
    assert errs[0] / errs[1] > 3.5


def test_numba_and_numpy_assembly_agree():
    grid = build_log_grid(1e-4, 10.0, 128)
    a = assemble_kernel(grid, 1.2, use_numba=True).K
    b = assemble_kernel(grid, 1.2, use_numba=False).K
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=0.0)


def test_cache_round_trip(tmp_path):
    grid = build_log_grid(1e-4, 10.0, 64)
    first = load_or_assemble(grid, 1.0, cache_dir=tmp_path)
    files = list(tmp_path.glob("riesz-*.npz"))
    assert len(files) == 1
    again = load_or_assemble(grid, 1.0, cache_dir=tmp_path, verify=True)
    assert np.array_equal(first.K, again.K)
    assert again.checksum() == first.checksum()


def test_cache_discards_corrupt_file(tmp_path):
    grid = build_log_grid(1e-4, 10.0, 64)
    good = load_or_assemble(grid, 1.0, cache_dir=tmp_path)
    path = next(tmp_path.glob("riesz-*.npz"))
    with np.load(path) as data:
        stored = dict(data)
    stored["K"] = stored["K"] * 1.01
    np.savez(path, **stored)
    reloaded = load_or_assemble(grid, 1.0, cache_dir=tmp_path)
    assert np.array_equal(reloaded.K, good.K)
    path.write_bytes(b"not an npz")
    assert np.array_equal(load_or_assemble(grid, 1.0, cache_dir=tmp_path).K, good.K)


def test_cache_key_separates_mu(tmp_path):
    grid = build_log_grid(1e-4, 10.0, 64)
    load_or_assemble(grid, 1.0, cache_dir=tmp_path)
    load_or_assemble(grid, 0.5, cache_dir=tmp_path)
    assert len(list(tmp_path.glob("riesz-*.npz"))) == 2


def test_kernel_shape_checked(small_grid):
    with pytest.raises(UsageError):
        RieszKernel(1.0, small_grid, np.zeros((3, 3)))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from([0.5, 1.0, 1.5]))
def test_hls_property(seed, mu):
    grid = build_log_grid(1e-4, 20.0, 256)
    kernel = _kernel_cache(grid, mu)
    rng = np.random.default_rng(seed)
    g, h = random_profile(grid, rng), random_profile(grid, rng)
    assert 0.0 <= hls_ratio(kernel, g, h) <= 1 + 5e-3
    assert np.all(convolve(kernel, g).values >= 0.0)


_KERNELS = {}


def _kernel_cache(grid, mu):
    if mu not in _KERNELS:
        _KERNELS[mu] = assemble_kernel(grid, mu)
    return _KERNELS[mu]

import math

import numpy as np
import pytest
from scipy import integrate

from partrace.continuum import (
    Grid,
    GridWavefunction,
    analytic_marginal,
    continuum_partial_trace,
    epr_gaussian,
    gaussian_demo,
    marginal_density_direct,
    normalize_wavefunction,
    pure_grid_density,
    reduced_from_pure,
    sample_wavefunction,
)
from partrace.errors import GridError, ShapeError
from partrace.linalg import hermitian_eig

S_SMALL, S_LARGE = 0.5, 2.0


def gaussian_psi(n, s=S_SMALL, S=S_LARGE, lo=-8.0, hi=8.0):
    g = Grid(lo, hi, n)
    return normalize_wavefunction(sample_wavefunction(epr_gaussian(s, S), g, g))


def separable_psi(n):
    g = Grid(-6.0, 6.0, n)

    def f(a, b):
        return np.exp(-(a - 0.3) ** 2 / 2 + 0.4j * a) * np.exp(-(b**2) / 3)

    return normalize_wavefunction(sample_wavefunction(f, g, g))


def quad_marginal(a, s, S):
    """Independent oracle: integrate |psi|^2 over b, normalized by a double integral."""

    def density(b, x):
        return np.exp(-((x - b) ** 2) / (2 * s * s) - ((x + b) ** 2) / (2 * S * S))

    norm, _ = integrate.dblquad(density, -np.inf, np.inf, -np.inf, np.inf)
    val, _ = integrate.quad(density, -np.inf, np.inf, args=(a,))
    return val / norm


def test_grid_invariants():
    g = Grid(-1.0, 1.0, 8)
    assert g.h == 0.25
    assert np.allclose(g.nodes, -1 + 0.125 + 0.25 * np.arange(8))
    for bad in [(-1, 1, 7), (1, -1, 16), (0, 0, 16)]:
        with pytest.raises(GridError):
            Grid(*bad)


@pytest.mark.parametrize("a", [0.0, 0.7, -1.3, 2.5])
def test_analytic_marginal_matches_quadrature(a):
    assert analytic_marginal(np.array(a), S_SMALL, S_LARGE) == pytest.approx(quad_marginal(a, S_SMALL, S_LARGE), abs=1e-9)


def test_normalize_examples():
    psi = gaussian_psi(64)
    assert abs(psi.norm2() - 1) <= 1e-10
    again = normalize_wavefunction(psi)
    assert np.max(np.abs(again.values - psi.values)) <= 1e-12
    scaled = GridWavefunction(psi.grid_a, psi.grid_b, 7 * psi.values)
    assert np.max(np.abs(normalize_wavefunction(scaled).values - psi.values)) <= 1e-12
    with pytest.raises(ShapeError):
        normalize_wavefunction(GridWavefunction(psi.grid_a, psi.grid_b, 0 * psi.values))


def test_marginal_direct_separable():
    psi = separable_psi(48)
    phi = np.exp(-(psi.grid_a.nodes - 0.3) ** 2 / 2)
    phi2 = phi**2 / (np.sum(phi**2) * psi.grid_a.h)
    assert np.max(np.abs(marginal_density_direct(psi) - phi2)) <= 1e-10


def test_marginal_direct_gaussian_and_symmetry():
    psi = gaussian_psi(128)
    f_a = marginal_density_direct(psi)
    assert abs(f_a.sum() * psi.grid_a.h - 1) <= 1e-8
    assert np.max(np.abs(f_a - analytic_marginal(psi.grid_a.nodes, S_SMALL, S_LARGE))) <= 1e-3
    # psi(a, b) = psi(b, a) for this state
    f_b = np.sum(np.abs(psi.values) ** 2, axis=0) * psi.grid_a.h
    assert np.max(np.abs(f_a - f_b)) <= 1e-15


def test_reduced_separable_rank_one():
    psi = separable_psi(40)
    rho = reduced_from_pure(psi)
    phi = psi.values[:, 0] / np.linalg.norm(psi.values[:, 0])
    proj = np.outer(phi, phi.conj()) / psi.grid_a.h
    assert np.max(np.abs(rho.matrix - proj)) <= 1e-10


@pytest.mark.parametrize("n", [16, 32, 64, 128, 256])
def test_populations_are_marginal(n):
    psi = gaussian_psi(n)
    rho = reduced_from_pure(psi)
    assert np.max(np.abs(np.diag(rho.matrix).real - marginal_density_direct(psi))) <= 1e-12


def test_reduced_hermitian_psd_mixed():
    psi = gaussian_psi(64)
    rho = reduced_from_pure(psi)
    assert np.max(np.abs(rho.matrix - rho.matrix.conj().T)) <= 1e-10
    assert hermitian_eig(rho.matrix * rho.cell).eigenvalues[-1] >= -1e-10
    assert rho.purity() < 1 - 1e-3
    assert abs(rho.unit_trace() - 1) <= 1e-8


def test_full_matrix_route_matches_pure_route():
    psi = gaussian_psi(24, lo=-8.0, hi=8.0)
    full = continuum_partial_trace(pure_grid_density(psi))
    assert np.max(np.abs(full.matrix - reduced_from_pure(psi).matrix)) <= 1e-12
    assert abs(full.unit_trace() - 1) <= 1e-8


def test_full_matrix_route_separable():
    psi = separable_psi(20)
    full = continuum_partial_trace(pure_grid_density(psi))
    assert np.max(np.abs(full.matrix - reduced_from_pure(psi).matrix)) <= 1e-10


def test_full_matrix_size_guard():
    psi = gaussian_psi(72)
    with pytest.raises(GridError):
        pure_grid_density(psi)


def test_demo_default():
    rep = gaussian_demo(S_SMALL, S_LARGE, Grid(-8, 8, 128))
    assert rep.passed and rep.sup_error <= 1e-3
    assert rep.refined_sup_error <= max(rep.sup_error, 1e-10)
    assert rep.population_match <= 1e-12
    # exact purity of the reduced two-mode Gaussian is 2 s S / (s^2 + S^2)
    assert rep.purity == pytest.approx(2 * S_SMALL * S_LARGE / (S_SMALL**2 + S_LARGE**2), abs=1e-8)


def test_demo_separable_limit():
    rep = gaussian_demo(1.0, 1.0, Grid(-8, 8, 128))
    assert rep.purity >= 1 - 1e-8


def test_demo_convergence_until_floor():
    errs = [gaussian_demo(S_SMALL, S_LARGE, Grid(-8, 8, n)).sup_error for n in (32, 64, 128, 256)]
    for coarse, fine in zip(errs, errs[1:]):
        assert fine <= coarse or max(coarse, fine) <= 1e-10


def test_demo_tail_guard():
    with pytest.raises(GridError):
        gaussian_demo(S_SMALL, S_LARGE, Grid(-3, 3, 128))
    with pytest.raises(GridError):
        gaussian_demo(0.0, S_LARGE)


def test_tail_mass_formula():
    from partrace.continuum import tail_mass

    sigma = math.sqrt((S_SMALL**2 + S_LARGE**2) / 4)
    expected = 2 * math.erfc(3 / (sigma * math.sqrt(2)))
    assert tail_mass(S_SMALL, S_LARGE, Grid(-3, 3, 16)) == pytest.approx(expected)

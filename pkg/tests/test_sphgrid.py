import numpy as np
import pytest
from hypothesis import given, strategies as st

from stokespec.errors import ConfigurationError
from stokespec.specfun import n_coeffs
from stokespec.sphgrid import (
    ScalarShellField, barycentric_diff_matrix, build_radial_grid, build_shell_grid,
    build_sphere_grid, gauss_legendre, is_gauged, radial_mean, sh_analyze, sh_synthesize,
)


def test_sphere_weights_sum():
    sph = build_sphere_grid(9, 20)
    assert sph.weights.sum() == pytest.approx(4 * np.pi, rel=1e-14)
    assert sph.cos_theta[0] > sph.cos_theta[-1]  # north pole first


def test_max_degree_and_errors():
    sph = build_sphere_grid(8, 16)
    assert sph.max_degree == 7
    with pytest.raises(ConfigurationError):
        sph.basis(8)
    with pytest.raises(ConfigurationError):
        build_sphere_grid(1, 8)
    with pytest.raises(ConfigurationError, match="sigma out of range"):
        build_radial_grid(1.2, 10)
    with pytest.raises(ConfigurationError):
        build_radial_grid(0.0, 1)


def test_gauss_legendre_extended():
    x, w = gauss_legendre(20, np.longdouble)
    assert x.dtype == np.longdouble
    assert abs(np.sum(w) - 2) < 1e-17
    assert abs(np.sum(w * x ** 10) - 2 / np.longdouble(11)) < 1e-17


def test_diff_matrix_exact_on_polynomials():
    x = build_radial_grid(0.3, 12).nodes
    d = barycentric_diff_matrix(x)
    assert np.allclose(d @ x ** 7, 7 * x ** 6, rtol=1e-11)
    assert np.allclose(d @ np.ones_like(x), 0, atol=1e-12)


def test_radial_quadrature():
    rad = build_radial_grid(0.5, 10)
    assert np.sum(rad.weights * rad.nodes ** 2) == pytest.approx((1 - 0.125) / 3, rel=1e-14)


@given(st.integers(1, 8), st.integers(0, 2 ** 31))
def test_analysis_synthesis_round_trip(lmax, seed):
    rng = np.random.default_rng(seed)
    grid = build_shell_grid(0.2, 3, lmax + 1, max(4, 2 * lmax + 1))
    c = rng.standard_normal((3, n_coeffs(lmax)))
    f = ScalarShellField(grid, coeffs=c, lmax=lmax)
    back = sh_analyze(sh_synthesize(f), lmax)
    assert np.allclose(back.coeffs, c, atol=1e-12)


def test_representations():
    grid = build_shell_grid(0.0, 4, 6, 12)
    f = ScalarShellField.from_function(grid, lambda r, t, p: r * np.cos(t) + 2.0)
    assert f.representation == "samples"
    c = f.to_coefficients(3)
    assert c.representation == "coefficients"
    # 2 = 2 sqrt(4 pi) Z_00; r cos = r sqrt(4 pi / 3) Z_10
    assert np.allclose(c.coefficient(0, 0), 2 * np.sqrt(4 * np.pi))
    assert np.allclose(c.coefficient(1, 0), grid.radial.nodes * np.sqrt(4 * np.pi / 3))
    assert np.allclose(radial_mean(f), 2.0)
    assert np.allclose(radial_mean(c), 2.0)
    assert not is_gauged(f)
    g = ScalarShellField.from_function(grid, lambda r, t, p: r * np.sin(t) * np.cos(p))
    assert is_gauged(g)
    with pytest.raises(ValueError):
        ScalarShellField(grid)
    with pytest.raises(ConfigurationError):
        ScalarShellField(grid, samples=np.zeros((2, 2, 2)))


def test_shell_volume():
    grid = build_shell_grid(0.5, 6, 4, 8)
    vol = grid.integrate(np.ones(grid.shape))
    assert vol == pytest.approx(4 * np.pi / 3 * (1 - 0.125), rel=1e-13)
    assert grid.spec() == {"sigma": 0.5, "nr": 6, "ntheta": 4, "nphi": 8}

import math
import warnings

import numpy as np
import pytest

import oracles
from stokespec import spectrum
from stokespec.errors import ConvergenceError, DomainError, IllConditionedError
from stokespec.fields import inner, norm, vector_laplacian
from stokespec.specfun import scan_roots
from stokespec.spectrum import (
    DomainSpec, EigenEntry, annulus_poloidal_det, annulus_poloidal_mode, annulus_roots,
    annulus_toroidal_det, annulus_toroidal_mode, ball_poloidal_mode, ball_toroidal_mode,
    boundary_max, eigen_table, family_roots, first_modes, poloidal_bc_det, radial_basis, stokes_mode,
)
from stokespec.sphgrid import build_shell_grid, build_sphere_grid
from stokespec.verify import mode_grid, scalar_problem_residuals


def test_oracle_constants():
    assert oracles.j32_zero() == pytest.approx(oracles.J32_ZERO, rel=1e-15)
    assert oracles.j52_zero() == pytest.approx(oracles.J52_ZERO, rel=1e-15)
    assert oracles.j32_zero() ** 2 == pytest.approx(oracles.BALL_TOROIDAL_L1, rel=1e-14)
    assert oracles.j52_zero() ** 2 == pytest.approx(oracles.BALL_POLOIDAL_L1, rel=1e-13)


# --- ball -----------------------------------------------------------------------

def test_ball_toroidal_ground_mode():
    m = ball_toroidal_mode(1, 0, 1)
    assert m.mu == pytest.approx(oracles.j32_zero(), rel=1e-14)
    assert m.lam == pytest.approx(oracles.BALL_TOROIDAL_L1, rel=1e-8)
    assert m.multiplicity == 3
    lams = {ball_toroidal_mode(1, k, 1).lam for k in (-1, 0, 1)}
    assert len(lams) == 1


def test_ball_poloidal_ground_mode():
    m = ball_poloidal_mode(1, 0, 1)
    assert m.mu == pytest.approx(oracles.j52_zero(), rel=1e-12)
    assert m.lam == pytest.approx(oracles.BALL_POLOIDAL_L1, rel=1e-6)
    one = np.array(1.0)
    assert abs(m.profile(one)) < 1e-12
    assert abs(m.profile(one, 1)) < 1e-9


@pytest.mark.parametrize("ctor", [ball_toroidal_mode, ball_poloidal_mode])
@pytest.mark.parametrize("l,k,j", [(1, 0, 1), (2, -1, 2), (3, 3, 1)])
def test_ball_boundary_vanishing(ctor, l, k, j):
    m = ctor(l, k, j)
    assert boundary_max(m, build_sphere_grid(l + 2, 2 * l + 4)) < 1e-10


@pytest.mark.parametrize("ctor", [ball_toroidal_mode, ball_poloidal_mode])
def test_l0_rejected(ctor):
    with pytest.raises(DomainError, match="mean-value gauge"):
        ctor(0, 0, 1)


def test_order_out_of_range():
    with pytest.raises(DomainError):
        ball_toroidal_mode(1, 2, 1)


def test_radial_basis_derivative():
    r = np.linspace(0.3, 1.0, 7)
    h = 1e-6
    val, der = radial_basis(2, 7.3, r)
    fd = (radial_basis(2, 7.3, r + h)[0] - radial_basis(2, 7.3, r - h)[0]) / (2 * h)
    assert np.allclose(der, fd, rtol=1e-7, atol=1e-7)


def test_profile_second_derivative():
    m = annulus_poloidal_mode(0.4, 2, 0, 2)
    r = np.linspace(0.45, 0.95, 9)
    h = 1e-5
    fd = (m.profile(r + h, 1) - m.profile(r - h, 1)) / (2 * h)
    assert np.allclose(m.profile(r, 2), fd, rtol=1e-6, atol=1e-6 * np.max(np.abs(fd)))


def test_profile_rejects_nonpositive_radius():
    with pytest.raises(DomainError):
        ball_toroidal_mode(1, 0, 1).profile(np.array([0.0, 0.5]))


# --- annulus determinants -----------------------------------------------------------

def test_annulus_l0_root():
    root = annulus_roots("toroidal", 0.5, 0, 1)[0]
    assert root == pytest.approx(oracles.annulus_l0_root(0.5), abs=1e-10)
    # both J_{1/2} entries vanish at 2 pi; the determinant must still be small there
    assert abs(annulus_toroidal_det(0.5, 0, 2 * math.pi)) < 1e-12
    mu = np.linspace(0.5, 20, 40)
    dets = np.array([annulus_toroidal_det(0.5, 0, x) for x in mu])
    # proportional to -sin(mu (1 - sigma)) with a sign-definite factor
    ratio = dets / -np.sin(mu * 0.5)
    assert np.all(ratio > 0)


def test_toroidal_roots_sign_change_and_spacing():
    roots = annulus_roots("toroidal", 0.5, 1, 10)
    for a, b in zip(roots, roots[1:]):
        mid = 0.5 * (a + b)
        assert annulus_toroidal_det(0.5, 1, a + 1e-3) * annulus_toroidal_det(0.5, 1, mid) > 0
        assert annulus_toroidal_det(0.5, 1, mid) * annulus_toroidal_det(0.5, 1, b - 1e-3) > 0
        assert annulus_toroidal_det(0.5, 1, a - 1e-3) * annulus_toroidal_det(0.5, 1, a + 1e-3) < 0
    gaps = np.diff(roots)
    assert abs(gaps[-1] - 2 * math.pi) < abs(gaps[0] - 2 * math.pi)
    assert gaps[-1] == pytest.approx(2 * math.pi, rel=2e-3)


@pytest.mark.parametrize("l", [1, 2, 3])
def test_printed_and_boundary_determinants_share_roots(l):
    bc = annulus_roots("poloidal", 0.5, l, 5)
    printed = annulus_roots("poloidal", 0.5, l, 5, printed=True)
    assert np.max(np.abs(np.array(bc) - np.array(printed))) < 1e-9


def test_poloidal_determinant_smooth_and_roots_simple():
    mu = np.linspace(0.1, 60, 600)
    vals = np.array([annulus_poloidal_det(0.5, 1, x) for x in mu])
    assert np.all(np.isfinite(vals))
    h = 1e-6
    for root in annulus_roots("poloidal", 0.5, 1, 5):
        slope = (poloidal_bc_det(0.5, 1, root + h) - poloidal_bc_det(0.5, 1, root - h)) / (2 * h)
        assert abs(slope) > 1e-6
        assert abs(poloidal_bc_det(0.5, 1, root)) < 1e-10


def test_annulus_domain_checks():
    with pytest.raises(DomainError):
        annulus_toroidal_det(0.0, 1, 3.0)
    with pytest.raises(DomainError):
        annulus_poloidal_det(0.5, 0, 3.0)
    with pytest.raises(DomainError):
        annulus_toroidal_mode(0.5, 0, 0, 1)
    with pytest.raises(DomainError):
        DomainSpec(1.2)


# --- annulus modes -------------------------------------------------------------------

@pytest.mark.parametrize("sigma", [0.2, 0.5, 0.8])
@pytest.mark.parametrize("l,j", [(1, 1), (2, 3), (4, 2)])
def test_annulus_toroidal_mode_boundary(sigma, l, j):
    m = annulus_toroidal_mode(sigma, l, 0, j)
    r = np.linspace(sigma, 1, 400)
    scale = np.max(np.abs(m.profile(r)))
    assert abs(m.profile(np.array(sigma))) < 1e-10 * scale
    assert abs(m.profile(np.array(1.0))) < 1e-10 * scale
    assert m.norm() == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("sigma", [0.2, 0.5, 0.8])
@pytest.mark.parametrize("l,j", [(1, 1), (2, 3), (4, 2)])
def test_annulus_poloidal_mode_boundary(sigma, l, j):
    m = annulus_poloidal_mode(sigma, l, 0, j)
    r = np.linspace(sigma, 1, 400)
    scale = np.max(np.abs(m.profile(r)))
    for end in (sigma, 1.0):
        assert abs(m.profile(np.array(end))) < 1e-9 * scale
        assert abs(m.profile(np.array(end), 1)) < 1e-9 * scale
    assert boundary_max(m, build_sphere_grid(l + 2, 2 * l + 4)) < 1e-8
    assert m.norm() == pytest.approx(1.0, rel=1e-12)


def test_annulus_toroidal_residual():
    rep = scalar_problem_residuals(annulus_toroidal_mode(0.5, 1, 0, 1))
    assert rep.checks["equation"].measured < 1e-7


def test_annulus_poloidal_residual():
    rep = scalar_problem_residuals(annulus_poloidal_mode(0.5, 2, 0, 2))
    assert rep.checks["equation"].measured < 1e-6


def test_small_hole_approaches_ball():
    lam = annulus_toroidal_mode(0.01, 1, 0, 1).lam
    assert lam == pytest.approx(ball_toroidal_mode(1, 0, 1).lam, rel=0.02)


def test_ill_conditioned_boundary_system(monkeypatch):
    monkeypatch.setattr(spectrum, "COND_LIMIT", 1.0)
    with pytest.raises(IllConditionedError) as info:
        annulus_poloidal_mode(0.5, 1, 0, 1)
    assert info.value.condition > 1.0


def test_root_scan_failure():
    with pytest.raises(ConvergenceError) as info:
        scan_roots(lambda x: 1.0 + x * x, 0.1, 0.1, 1, max_steps=50)
    assert info.value.interval is not None


@pytest.mark.parametrize("sigma", [0.0, 0.5])
@pytest.mark.parametrize("family", ["toroidal", "poloidal"])
def test_roots_increase_in_j(sigma, family):
    roots = family_roots(DomainSpec(sigma), family, 2, 6)
    assert np.all(np.diff(roots) > 0)


# --- vector eigen-equations on the grid --------------------------------------------

@pytest.mark.parametrize("sigma", [0.0, 0.5])
def test_toroidal_vector_equation(sigma):
    m = stokes_mode(DomainSpec(sigma), "toroidal", 2, 1, 1)
    g = build_shell_grid(sigma, 40, 5, 10)
    u = m.sample(g)
    res = vector_laplacian(u) * -1 - u * m.lam
    assert norm(res) / norm(u) < 1e-6


@pytest.mark.parametrize("sigma", [0.0, 0.5])
def test_distinct_modes_orthogonal(sigma):
    dom = DomainSpec(sigma)
    modes = [stokes_mode(dom, "toroidal", 1, 0, 1), stokes_mode(dom, "toroidal", 1, 0, 2),
             stokes_mode(dom, "poloidal", 1, 0, 1), stokes_mode(dom, "poloidal", 2, 0, 1)]
    g = mode_grid(modes)
    fields = [m.sample(g) for m in modes]
    for i in range(len(fields)):
        assert norm(fields[i]) == pytest.approx(1.0, abs=1e-9)
        for jj in range(i):
            assert abs(inner(fields[i], fields[jj])) < 1e-8


# --- tables ----------------------------------------------------------------------

def test_ball_table():
    with pytest.warns(UserWarning, match="truncated"):
        table = eigen_table(DomainSpec(0.0), 4, per_l=3)
    first = table.entries[0]
    assert (first.family, first.l, first.j, first.multiplicity) == ("toroidal", 1, 1, 3)
    assert first.lam == pytest.approx(20.190729, rel=1e-7)
    lams = [e.lam for e in table]
    assert lams == sorted(lams)
    assert len(table) == 4 * 2 * 3


def test_sort_key_breaks_ties():
    a = EigenEntry(33.2, 5.76, "poloidal", 1, 1)
    b = EigenEntry(33.2, 5.76, "toroidal", 2, 1)
    assert sorted([a, b], key=EigenEntry.sort_key) == [b, a]


def test_truncation_warning():
    with pytest.warns(UserWarning, match="truncated"):
        table = eigen_table(DomainSpec(0.0), 1, per_l=4)
    assert table.truncated
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        table = eigen_table(DomainSpec(0.0), 6, count=5)
    assert not table.truncated


@pytest.mark.filterwarnings("ignore:eigen table truncated")
def test_count_table_is_prefix():
    dom = DomainSpec(0.5)
    small = eigen_table(dom, 4, count=6)
    big = eigen_table(dom, 4, per_l=3)
    assert small.entries == big.entries[:6]


def test_table_arguments_validated():
    with pytest.raises(DomainError):
        eigen_table(DomainSpec(0.0), 0, per_l=1)
    with pytest.raises(DomainError):
        eigen_table(DomainSpec(0.0), 2)


def test_first_modes_counts_multiplicity():
    modes = first_modes(DomainSpec(0.0), 20)
    assert len(modes) == 20
    assert [m.family for m in modes[:3]] == ["toroidal"] * 3
    assert [m.k for m in modes[:3]] == [-1, 0, 1]
    lams = [m.lam for m in modes]
    assert lams == sorted(lams)


@pytest.mark.filterwarnings("ignore:eigen table truncated")
def test_thread_override_same_table(monkeypatch):
    dom = DomainSpec(0.3)
    spectrum._annulus_roots.cache_clear()
    monkeypatch.setenv("STOKESPEC_THREADS", "1")
    serial = eigen_table(dom, 3, count=8)
    spectrum._annulus_roots.cache_clear()
    monkeypatch.setenv("STOKESPEC_THREADS", "4")
    parallel = eigen_table(dom, 3, count=8)
    assert serial.entries == parallel.entries

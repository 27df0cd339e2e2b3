"""Numerical verification: vector calculus identities, mode orthogonality,
projection onto the first N modes, and residuals of the scalar problems.

Each entry point returns a VerificationReport mapping check names to
(measured, tolerance, passed). Random inputs are spectral: band-limited
potentials with coefficients decaying like (1 + l)^-2 and radial profiles
r^l p(r^2), which stay smooth at the origin of the ball.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import json

import numpy as np

from .config import worker_count
from .fields import (
    Spectral, VectorShellField, scalar_spec_norm, spec_curl, spec_div, spec_grad, spec_norm,
    spec_poloidal, spec_scalar_laplacian, spec_toroidal, spec_vector_laplacian, vsh_analyze,
    vsh_synthesize,
)
from .specfun import degree_order_arrays, n_coeffs
from .sphgrid import ShellGrid, build_radial_grid, build_shell_grid
from .spectrum import boundary_max

SPECTRAL_TOL = 1e-10
DERIVATIVE_TOL = 1e-6

# name -> tolerance; every identity check is registered here exactly once
IDENTITY_CHECKS = {
    "curl_grad": SPECTRAL_TOL,
    "div_curl": SPECTRAL_TOL,
    "laplacian_beltrami_commute": SPECTRAL_TOL,
    "curl_curl_expansion": DERIVATIVE_TOL,
    "curl_of_product": DERIVATIVE_TOL,
    "div_of_product": DERIVATIVE_TOL,
    "laplacian_two_forms": DERIVATIVE_TOL,
    "poloidal_field_expansion": DERIVATIVE_TOL,
    "laplacian_toroidal_commute": DERIVATIVE_TOL,
    "laplacian_poloidal_commute": DERIVATIVE_TOL,
    "solenoidal_vector_laplacian": DERIVATIVE_TOL,
    "radial_projection_laplacian": DERIVATIVE_TOL,
    "radial_curl_laplacian": DERIVATIVE_TOL,
    "radial_bilaplacian": DERIVATIVE_TOL,
}


@dataclass
class Check:
    measured: float
    tol: float

    @property
    def passed(self):
        return bool(np.isfinite(self.measured) and self.measured < self.tol)


@dataclass
class VerificationReport:
    name: str
    checks: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def add(self, check, measured, tol):
        if check in self.checks:
            raise ValueError(f"check {check!r} registered twice")
        self.checks[check] = Check(float(measured), float(tol))

    @property
    def passed(self):
        return all(c.passed for c in self.checks.values())

    def failures(self):
        return [n for n, c in self.checks.items() if not c.passed]

    def to_dict(self):
        return {
            "suite": self.name,
            "status": "pass" if self.passed else "fail",
            "checks": {
                n: {"measured": c.measured, "tol": c.tol, "pass": c.passed}
                for n, c in sorted(self.checks.items())
            },
            "details": self.details,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def lines(self):
        for n, c in sorted(self.checks.items()):
            yield f"{'PASS' if c.passed else 'FAIL'}  {n:32s} {c.measured:.3e} (tol {c.tol:.0e})"


def merge_reports(name, reports):
    out = VerificationReport(name)
    for rep in reports:
        for n, c in rep.checks.items():
            out.add(f"{rep.name}.{n}" if rep.name else n, c.measured, c.tol)
        if rep.details:
            out.details[rep.name] = rep.details
    return out


# --- random spectral fields -------------------------------------------------

def random_potential(rng, radial, lmax, gauged=True, terms=3):
    """Coefficients (n_r, ncoef) of a smooth random scalar:
    sum over (l, k) of (1 + l)^-2 r^l p_lk(r^2) with random cubic p_lk."""
    ls, _ = degree_order_arrays(lmax)
    r = radial.nodes[:, None]
    coef = rng.standard_normal((terms + 1, n_coeffs(lmax)))
    poly = sum(coef[m] * r ** (2 * m) for m in range(terms + 1))
    c = poly * r ** ls / (1.0 + ls) ** 2
    if gauged:
        c[:, 0] = 0
    return c


def random_solenoidal(rng, radial, lmax):
    """(field spectral, psi coeffs, chi coeffs) of a random gauged t + p."""
    psi = random_potential(rng, radial, lmax)
    chi = random_potential(rng, radial, lmax)
    s = spec_toroidal(psi, lmax) + spec_poloidal(chi, radial, lmax)
    return s, psi, chi


def random_vector(rng, radial, lmax):
    """A general smooth field t + p + grad(eta), not solenoidal."""
    s, _, _ = random_solenoidal(rng, radial, lmax)
    eta = random_potential(rng, radial, lmax, gauged=False)
    return s + spec_grad(eta, radial, lmax)


def random_field(grid, lmax, seed):
    """A seeded random solenoidal VectorShellField with its potentials."""
    rng = np.random.default_rng(seed)
    s, psi, chi = random_solenoidal(rng, grid.radial, lmax)
    return vsh_synthesize(grid, s, solenoidal=True), psi, chi


# --- identity suite -----------------------------------------------------------

def _rel(a, b, radial, scalar=False):
    nrm = scalar_spec_norm if scalar else spec_norm
    diff = nrm(a - b, radial)
    scale = max(nrm(a, radial), nrm(b, radial))
    return diff / scale if scale > 0 else diff


def _cross(a, b):
    """Pointwise cross product in the right-handed frame (e_r, e_theta, e_phi)."""
    return np.array([
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])


def _trial(grid, rng):
    rad = grid.radial
    lmax_hi = grid.max_degree
    lmax = max(1, (lmax_hi - 2) // 2)  # products stay resolved
    ls = degree_order_arrays(lmax)[0]
    lam = ls * (ls + 1.0)
    L = lambda c: lam * c  # noqa: E731
    lap = lambda c: spec_scalar_laplacian(c, rad, lmax)  # noqa: E731
    out = {}

    eta = random_potential(rng, rad, lmax, gauged=False)
    u = random_vector(rng, rad, lmax)
    sol, _, _ = random_solenoidal(rng, rad, lmax)
    r = rad.nodes[:, None]

    # curl grad eta = 0, div curl u = 0
    g = spec_grad(eta, rad, lmax)
    out["curl_grad"] = spec_norm(spec_curl(g, rad), rad) / spec_norm(g, rad)
    cu = spec_curl(u, rad)
    out["div_curl"] = scalar_spec_norm(spec_div(cu, rad), rad) / spec_norm(cu, rad)

    # curl curl u = grad div u - lap u
    out["curl_curl_expansion"] = _rel(
        spec_curl(cu, rad), spec_grad(spec_div(u, rad), rad, lmax) - spec_vector_laplacian(u, rad), rad)

    # lap B = B lap
    out["laplacian_beltrami_commute"] = _rel(lap(L(eta)), L(lap(eta)), rad, scalar=True)

    # (1/r^2)(r^2 eta')' - B eta / r^2 against (1/r)(r eta)'' - B eta / r^2
    d = rad.derivative
    std = d(r * r * d(eta)) / (r * r) - L(eta) / (r * r)
    out["laplacian_two_forms"] = _rel(std, lap(eta), rad, scalar=True)

    # curl curl(eta x) = grad(eta + x.grad eta) - (lap eta) x
    ex = Spectral(r * eta, np.zeros_like(eta), np.zeros_like(eta), lmax)
    lhs = spec_curl(spec_curl(ex, rad), rad)
    rhs = spec_grad(eta + r * d(eta), rad, lmax) - Spectral(r * lap(eta), 0 * eta, 0 * eta, lmax)
    out["poloidal_field_expansion"] = _rel(lhs, rhs, rad)

    # lap curl(eta x) = curl((lap eta) x), and the same for curl curl
    lap_eta_x = Spectral(r * lap(eta), 0 * eta, 0 * eta, lmax)
    t_eta = spec_curl(ex, rad)
    out["laplacian_toroidal_commute"] = _rel(
        spec_vector_laplacian(t_eta, rad), spec_curl(lap_eta_x, rad), rad)
    out["laplacian_poloidal_commute"] = _rel(
        spec_vector_laplacian(spec_curl(t_eta, rad), rad),
        spec_curl(spec_curl(lap_eta_x, rad), rad), rad)

    # solenoidal u: -lap u = curl curl u, lap(x.u) = x.lap u
    lap_u = spec_vector_laplacian(sol, rad)
    cs = spec_curl(sol, rad)
    ccs = spec_curl(cs, rad)
    out["solenoidal_vector_laplacian"] = _rel(-lap_u, ccs, rad)
    xu = sol.radial_part(rad)
    out["radial_projection_laplacian"] = _rel(lap(xu), lap_u.radial_part(rad), rad, scalar=True)

    # x.curl lap u = x.lap curl u = lap(x.curl u)
    a = spec_curl(lap_u, rad).radial_part(rad)
    b = spec_vector_laplacian(cs, rad).radial_part(rad)
    c = lap(cs.radial_part(rad))
    out["radial_curl_laplacian"] = max(_rel(a, c, rad, True), _rel(b, c, rad, True))

    # -x.curl curl lap u = -x.lap curl curl u = lap(x.lap u) = lap^2(x.u)
    a = -spec_curl(spec_curl(lap_u, rad), rad).radial_part(rad)
    b = -spec_vector_laplacian(ccs, rad).radial_part(rad)
    c = lap(lap_u.radial_part(rad))
    e = lap(lap(xu))
    out["radial_bilaplacian"] = max(_rel(a, e, rad, True), _rel(b, e, rad, True), _rel(c, e, rad, True))

    # products: pointwise on the grid, re-analyzed at the full resolvable degree
    sph = grid.sphere
    eta_s = sph.synthesize(eta, lmax)
    u_s = vsh_synthesize(grid, u).values
    prod = vsh_analyze(VectorShellField(grid, eta_s[None] * u_s), lmax_hi)
    g_s = vsh_synthesize(grid, g).values
    rhs = vsh_analyze(VectorShellField(grid, eta_s[None] * vsh_synthesize(grid, cu).values
                                       + _cross(g_s, u_s)), lmax_hi)
    out["curl_of_product"] = _rel(spec_curl(prod, rad), rhs, rad)
    div_rhs = sph.analyze(eta_s * sph.synthesize(spec_div(u, rad), lmax) + np.sum(u_s * g_s, axis=0), lmax_hi)
    out["div_of_product"] = _rel(spec_div(prod, rad), div_rhs, rad, scalar=True)
    return out


def extended_twin(grid):
    """Same grid with the radial nodes in extended precision."""
    return ShellGrid(build_radial_grid(grid.sigma, grid.radial.n, np.longdouble), grid.sphere)


def identity_suite(grid, trials=20, seed=0, extended=False):
    """Run every registered identity on ``trials`` seeded random inputs and
    report the worst relative discrepancy per identity.

    With ``extended`` the radial calculus runs on long double nodes, which
    shows how much of each discrepancy is roundoff.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    work = extended_twin(grid) if extended else grid
    rngs = [np.random.default_rng([seed, t]) for t in range(trials)]
    workers = worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda g: _trial(work, g), rngs))
    else:
        results = [_trial(work, g) for g in rngs]
    rep = VerificationReport("identities")
    for name, tol in IDENTITY_CHECKS.items():
        rep.add(name, max(res[name] for res in results), tol)
    rep.details = {"trials": trials, "seed": seed, "grid": grid.spec(),
                   "radial_precision": "extended" if extended else "double"}
    return rep


# --- modes --------------------------------------------------------------------

def mode_grid(modes, n_r=None):
    """A shell grid resolving every mode in the list exactly in angle and
    their radial profiles to quadrature accuracy."""
    lmax = max(m.l for m in modes)
    mu = max(m.mu for m in modes)
    sigma = modes[0].domain.sigma
    if n_r is None:
        n_r = 32 + int(2 * mu)
    return build_shell_grid(sigma, n_r, lmax + 2, 2 * lmax + 4)


def orthogonality_matrix(modes, grid=None, diag_tol=1e-9, offdiag_tol=1e-8):
    """Gram matrix of sampled modes over the shell."""
    if grid is None:
        grid = mode_grid(modes)
    fields = np.array([m.sample(grid).values for m in modes])
    w = grid.volume_weights
    flat = fields.reshape(len(modes), 3, -1) * np.sqrt(w.reshape(-1))
    flat = flat.reshape(len(modes), -1)
    gram = flat @ flat.T
    off = gram - np.diag(np.diag(gram))
    rep = VerificationReport("orthogonality")
    rep.add("diagonal", np.max(np.abs(np.diag(gram) - 1)), diag_tol)
    rep.add("off_diagonal", np.max(np.abs(off)) if len(modes) > 1 else 0.0, offdiag_tol)
    rep.details = {
        "count": len(modes),
        "modes": [[m.family, m.l, m.k, m.j] for m in modes],
        "gram": gram.tolist(),
    }
    return rep


def bump(r, center, width):
    """exp(-1/(1 - s^2)) with s = (r - center)/width, and its r-derivative."""
    s = (np.asarray(r, dtype=float) - center) / width
    inside = np.abs(s) < 1
    f = np.zeros_like(s)
    fp = np.zeros_like(s)
    si = s[inside]
    q = 1 - si * si
    f[inside] = np.exp(-1 / q)
    fp[inside] = f[inside] * (-2 * si / (q * q)) / width
    return f, fp


BUMP_TERMS = (
    ("toroidal", 1, 0, 1.0), ("toroidal", 2, 1, 0.7), ("toroidal", 3, -2, 0.5),
    ("poloidal", 1, 1, 0.8), ("poloidal", 2, -1, 0.6), ("poloidal", 3, 0, 0.4),
)


def bump_field(grid):
    """Smooth solenoidal field supported in the interior of the shell:
    toroidal and poloidal parts with bump profiles on a few harmonics."""
    sigma = grid.sigma
    center, width = (1 + sigma) / 2, 0.35 * (1 - sigma)
    lmax = max(t[1] for t in BUMP_TERMS)
    grid.sphere.check_degree(lmax)
    r = grid.radial.nodes
    f, fp = bump(r, center, width)
    n = n_coeffs(lmax)
    U, V, W = (np.zeros((r.size, n)) for _ in range(3))
    for fam, l, k, amp in BUMP_TERMS:
        i = l * l + l + k
        if fam == "toroidal":
            W[:, i] += amp * f
        else:
            U[:, i] += amp * l * (l + 1) * f / r
            V[:, i] += amp * (f / r + fp)
    return vsh_synthesize(grid, Spectral(U, V, W, lmax), solenoidal=True)


def projection_completeness(u, modes, checkpoints=(10, 20, 40, 80)):
    """Energy captured by projecting u onto the first N modes."""
    grid = u.grid
    checkpoints = [n for n in checkpoints if n <= len(modes)]
    unorm2 = grid.integrate(np.sum(u.values ** 2, axis=0))
    resid = u.values.copy()
    captured = 0.0
    fractions, residuals = [], []
    for i, m in enumerate(modes, 1):
        w = m.sample(grid).values
        c = grid.integrate(np.sum(u.values * w, axis=0))
        captured += c * c
        resid -= c * w
        if i in checkpoints:
            fractions.append(float(captured / unorm2))
            residuals.append(float(np.sqrt(max(grid.integrate(np.sum(resid ** 2, axis=0)), 0) / unorm2)))
    rep = VerificationReport("completeness")
    incr = min((b - a for a, b in zip(fractions, fractions[1:])), default=1.0)
    # measured is minus the smallest increment, so only a strict increase passes
    rep.add("capture_increasing", -incr, 0.0)
    rep.add("residual_ratio", residuals[-1] / residuals[0] if residuals else 1.0, 0.5)
    rep.details = {"checkpoints": checkpoints, "captured": fractions, "residual": residuals}
    return rep


def resolved_nodes(mode, tol=1e-16, start=16, stop=240):
    """Smallest node count (step 4) whose Chebyshev interpolant of the radial
    potential has trailing coefficients below ``tol`` relative to the largest.

    Four radial derivatives amplify roundoff roughly like n^8, so the residual
    checks use the smallest grid that resolves the profile rather than a
    generous one.
    """
    sigma = np.longdouble(mode.domain.sigma)
    half = (1 - sigma) / 2
    pi = np.longdouble("3.14159265358979323846264338327950288")
    for n in range(start, stop + 1, 4):
        x = np.cos(pi * (np.arange(n, dtype=np.longdouble) + np.longdouble(0.5)) / n)
        c = np.polynomial.chebyshev.chebvander(x, n - 1).T @ mode.profile(sigma + half * (x + 1))
        if np.max(np.abs(c[-4:])) < tol * np.max(np.abs(c)):
            return n
    return stop


def scalar_problem_residuals(mode, n_r=None, eq_tol=1e-6, bc_tol=1e-8, sphere=None):
    """Residual of -lap psi = lam psi (toroidal) or lap^2 chi + lam lap chi = 0
    (poloidal) for the mode's radial potential, the matching vector equation
    (-lap u = lam u, or curl(-lap u - lam u) = 0 since the pressure gradient
    drops out), and boundary values.

    The radial calculus runs on an extended precision Gauss-Legendre grid
    sized by :func:`resolved_nodes`.
    """
    if n_r is None:
        n_r = resolved_nodes(mode)
    rad = build_radial_grid(mode.domain.sigma, n_r, np.longdouble)
    r = rad.nodes
    L = mode.l * (mode.l + 1)
    lam = np.longdouble(mode.mu) ** 2
    f = mode.profile(r)[:, None]
    w = rad.weights * r * r

    def lap(g):
        return rad.derivative(rad.derivative(r[:, None] * g)) / r[:, None] - L * g / (r * r)[:, None]

    def nrm(g):
        return float(np.sqrt(np.sum(w * g[:, 0] ** 2)))

    rep = VerificationReport(f"{mode.family}(l={mode.l},k={mode.k},j={mode.j})")
    s = mode._spectral(r)
    vlap = spec_vector_laplacian(s, rad)
    if mode.family == "toroidal":
        rep.add("equation", nrm(-lap(f) - lam * f) / nrm(f), eq_tol)
        rep.add("vector_equation", spec_norm(-vlap - lam * s, rad) / spec_norm(s, rad), eq_tol)
    else:
        lf = lap(f)
        rep.add("equation", nrm(lap(lf) + lam * lf) / nrm(lf), eq_tol)
        ref = spec_norm(spec_curl(lam * s, rad), rad)
        rep.add("vector_equation", spec_norm(spec_curl(-vlap - lam * s, rad), rad) / ref, eq_tol)
    ends = [1.0] if mode.domain.is_ball else [mode.domain.sigma, 1.0]
    scale = float(np.max(np.abs(f)))
    vals = [abs(float(mode.profile(np.array(e)))) for e in ends]
    if mode.family == "poloidal":
        dscale = float(np.max(np.abs(mode.profile(r, 1))))
        vals += [abs(float(mode.profile(np.array(e), 1))) * scale / dscale for e in ends]
    rep.add("potential_boundary", max(vals) / scale, bc_tol)
    if sphere is None:
        from .sphgrid import build_sphere_grid
        sphere = build_sphere_grid(mode.l + 2, 2 * mode.l + 4)
    rep.add("field_boundary", boundary_max(mode, sphere), bc_tol)
    rep.details = {"lambda": mode.lam, "mu": mode.mu, "n_r": n_r}
    return rep

"""Eigenpairs of the Stokes operator with no-slip walls on the unit ball and
on the shells sigma < |x| < 1.

A mode is a toroidal field curl(psi x) or a poloidal field curl curl(chi x)
with a single harmonic (l, k) in the potential. The radial profile is

    f(r) = a J_{l+1/2}(mu r)/sqrt(r) + b J_{-l-1/2}(mu r)/sqrt(r) + c r^l + d r^{-l-1}

with b = c = d = 0 for ball toroidal modes and b = d = 0 for ball poloidal
modes. Eigenvalues are lambda = mu^2 and carry multiplicity 2l + 1.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
import math
import warnings

import numpy as np

from . import _backend
from .config import worker_count
from .errors import ConvergenceError, DomainError, IllConditionedError
from .fields import Spectral, vsh_synthesize
from .specfun import bessel_zero, jhalf, scan_roots
from .sphgrid import ScalarShellField, gauss_legendre

FAMILIES = ("toroidal", "poloidal")
COND_LIMIT = 1e12


@dataclass(frozen=True)
class DomainSpec:
    sigma: float = 0.0

    def __post_init__(self):
        if not 0 <= self.sigma < 1:
            raise DomainError(f"sigma out of range [0, 1): {self.sigma}")

    @property
    def is_ball(self):
        return self.sigma == 0


def _check_family(family):
    if family not in FAMILIES:
        raise DomainError(f"unknown family {family!r}; expected one of {FAMILIES}")


def _check_degree(l, k=0):
    if l < 1:
        raise DomainError(
            "l = 0 carries no mode: potentials obey the mean-value gauge (vanishing "
            "shell averages), which removes the l = 0 harmonic"
        )
    if abs(k) > l:
        raise DomainError(f"order k={k} outside -l..l for l={l}")


def _bessel_block(l, mu, r):
    """g(r) = J_{n+1/2}(mu r)/sqrt(r) and g'(r) for n = l and n = -l-1."""
    r = np.asarray(r)
    x = mu * r
    tab = _backend.jhalf_range(-l - 2, l + 1, x)  # rows n = -l-2 .. l+1
    row = lambda n: tab[n + l + 2]  # noqa: E731
    sq = np.sqrt(r)
    out = []
    for n in (l, -l - 1):
        jd = 0.5 * (row(n - 1) - row(n + 1))
        g = row(n) / sq
        gp = mu * jd / sq - g / (2 * r)
        out.append((g, gp))
    return out


def radial_basis(l, mu, r):
    """Values and first derivatives of the four radial basis functions,
    each array of shape (4,) + r.shape."""
    r = np.asarray(r)
    (g1, g1p), (g2, g2p) = _bessel_block(l, mu, r)
    val = np.array([g1, g2, r ** l, r ** (-l - 1.0)])
    der = np.array([g1p, g2p, l * r ** (l - 1.0), -(l + 1) * r ** (-l - 2.0)])
    return val, der


@dataclass(frozen=True)
class StokesMode:
    domain: DomainSpec
    family: str
    l: int
    k: int
    j: int
    mu: float
    coeffs: tuple = field(default=(1.0, 0.0, 0.0, 0.0))

    @property
    def lam(self):
        return self.mu * self.mu

    @property
    def multiplicity(self):
        return 2 * self.l + 1

    @property
    def flat(self):
        return self.l * self.l + self.l + self.k

    @property
    def eigenvalue_L(self):
        return self.l * (self.l + 1)

    def profile(self, r, deriv=0):
        """Radial potential (psi or chi) or its first/second r-derivative.

        Accepts any floating dtype; extended precision arrays stay extended.
        """
        r = np.asarray(r)
        if np.any(r <= 0):
            raise DomainError("profiles are evaluated at r > 0")
        val, der = radial_basis(self.l, self.mu, r)
        c = np.array(self.coeffs, dtype=r.dtype if r.dtype.kind == "f" else float)
        shape = (4,) + (1,) * r.ndim
        c = c.reshape(shape)
        f = np.sum(c * val, axis=0)
        if deriv == 0:
            return f
        fp = np.sum(c * der, axis=0)
        if deriv == 1:
            return fp
        if deriv == 2:
            # both Bessel parts solve (1/r)(r g)'' - L g / r^2 = -mu^2 g,
            # the powers are harmonic
            L = self.eigenvalue_L
            bes = c[0] * val[0] + c[1] * val[1]
            return L * f / (r * r) - self.mu ** 2 * bes - 2 * fp / r
        raise ValueError("deriv must be 0, 1 or 2")

    def vsh_profiles(self, r):
        """(U, V, W) coefficients of the mode's (l, k) vector harmonic at r."""
        r = np.asarray(r)
        f = self.profile(r)
        if self.family == "toroidal":
            z = np.zeros_like(f)
            return z, z.copy(), f
        fp = self.profile(r, 1)
        return self.eigenvalue_L * f / r, f / r + fp, np.zeros_like(f)

    def _spectral(self, r):
        U, V, W = self.vsh_profiles(r)
        n = (self.l + 1) ** 2
        out = []
        for prof in (U, V, W):
            a = np.zeros(prof.shape + (n,), dtype=prof.dtype)
            a[..., self.flat] = prof
            out.append(a)
        return Spectral(*out, lmax=self.l)

    def sample(self, grid):
        """The mode as a VectorShellField on a shell grid."""
        grid.sphere.check_degree(self.l)
        return vsh_synthesize(grid, self._spectral(grid.radial.nodes), solenoidal=True)

    def values_on_sphere(self, radius, sphere):
        """(u_r, u_theta, u_phi) on a sphere grid at one radius, shape (3, n_theta, n_phi)."""
        sphere.check_degree(self.l)
        s = self._spectral(np.array([float(radius)]))
        from .surfcalc import grad_curl_synthesis
        ur = sphere.synthesize(s.U, self.l)
        ut, up = grad_curl_synthesis(sphere, self.l, s.V, s.W)
        return np.array([ur[0], ut[0], up[0]])

    def potential_field(self, grid):
        """The potential psi (toroidal) or chi (poloidal) as a coefficient field."""
        grid.sphere.check_degree(self.l)
        c = np.zeros((grid.radial.n, (self.l + 1) ** 2), dtype=grid.radial.dtype)
        c[:, self.flat] = self.profile(grid.radial.nodes)
        return ScalarShellField(grid, coeffs=c, lmax=self.l)

    def radial_energy_density(self, r):
        """Integrand over r of |u|^2 on the sphere of radius r (includes r^2)."""
        L = self.eigenvalue_L
        f = self.profile(r)
        if self.family == "toroidal":
            return r * r * L * f * f
        drf = f + r * self.profile(r, 1)
        return L * (L * f * f + drf * drf)

    def norm(self):
        return math.sqrt(_radial_integral(self.radial_energy_density, self.domain.sigma, self.mu))

    def with_order(self, k):
        _check_degree(self.l, k)
        return StokesMode(self.domain, self.family, self.l, k, self.j, self.mu, self.coeffs)


def _radial_integral(func, sigma, mu):
    n = 64 + 2 * int(mu)
    x, w = gauss_legendre(n)
    half = (1 - sigma) / 2
    r = sigma + half * (x + 1)
    return float(np.sum(half * w * func(r)))


def _normalized(domain, family, l, k, j, mu, coeffs):
    mode = StokesMode(domain, family, l, k, j, float(mu), tuple(float(c) for c in coeffs))
    s = mode.norm()
    return StokesMode(domain, family, l, k, j, float(mu), tuple(float(c) / s for c in coeffs))


# --- ball -------------------------------------------------------------------

def ball_toroidal_mode(l, k, j):
    _check_degree(l, k)
    mu = bessel_zero(l, j)
    return _normalized(DomainSpec(0.0), "toroidal", l, k, j, mu, (1.0, 0.0, 0.0, 0.0))


def ball_poloidal_mode(l, k, j):
    _check_degree(l, k)
    mu = bessel_zero(l + 1, j)
    c = -mu * float(jhalf(l - 1, mu)) / (2 * l + 1)
    return _normalized(DomainSpec(0.0), "poloidal", l, k, j, mu, (1.0, 0.0, c, 0.0))


# --- annulus ------------------------------------------------------------------

def _scaled_det(m):
    """Determinant with each row scaled to unit max. Positive scaling keeps
    the sign and so the roots; no row of these matrices vanishes, whereas a
    whole column can (J_{l+1/2} at mu sigma and mu both zero)."""
    m = np.asarray(m, dtype=float)
    scale = np.max(np.abs(m), axis=1, keepdims=True)
    scale[scale == 0] = 1
    return float(np.linalg.det(m / scale))


def _check_annulus(sigma):
    if not 0 < sigma < 1:
        raise DomainError(f"annulus needs 0 < sigma < 1, got {sigma}")


def annulus_toroidal_matrix(sigma, l, mu):
    jp = lambda x: float(jhalf(l, x))        # noqa: E731
    jm = lambda x: float(jhalf(-l - 1, x))   # noqa: E731
    return np.array([[jp(mu * sigma), jm(mu * sigma)], [jp(mu), jm(mu)]])


def annulus_toroidal_det(sigma, l, mu):
    """det [[J_{l+1/2}(mu s), J_{-l-1/2}(mu s)], [J_{l+1/2}(mu), J_{-l-1/2}(mu)]]
    evaluated with rows scaled to unit max."""
    _check_annulus(sigma)
    if l < 0:
        raise DomainError("l must be nonnegative")
    return _scaled_det(annulus_toroidal_matrix(sigma, l, mu))


def annulus_poloidal_matrix(sigma, l, mu):
    """Characteristic 4x4 matrix in half-integer Bessel form."""
    J = lambda n, x: float(jhalf(n, x))  # noqa: E731
    s, m = sigma, mu
    return np.array([
        [J(l - 1, m * s), J(-l, m * s), s ** (l - 0.5), 0.0],
        [J(l - 1, m), J(-l, m), 1.0, 0.0],
        [J(l + 1, m * s), J(-l - 2, m * s), 0.0, s ** (-l - 1.5)],
        [J(l + 1, m), J(-l - 2, m), 0.0, 1.0],
    ])


def annulus_poloidal_det(sigma, l, mu):
    _check_annulus(sigma)
    if l < 1:
        raise DomainError("poloidal determinant needs l >= 1")
    return _scaled_det(annulus_poloidal_matrix(sigma, l, mu))


def poloidal_bc_matrix(sigma, l, mu):
    """Rows chi(sigma), chi(1), chi'(sigma), chi'(1) of the four radial basis
    functions; its singularity is the no-slip eigenvalue condition."""
    val, der = radial_basis(l, mu, np.array([sigma, 1.0]))
    return np.array([val[:, 0], val[:, 1], der[:, 0], der[:, 1]])


def poloidal_bc_det(sigma, l, mu):
    _check_annulus(sigma)
    if l < 1:
        raise DomainError("poloidal determinant needs l >= 1")
    return _scaled_det(poloidal_bc_matrix(sigma, l, mu))


def scan_step(sigma):
    return math.pi / (4 * (1 - sigma))


def _round_count(j):
    count = max(j, 8)
    return 1 << (count - 1).bit_length()


@lru_cache(maxsize=None)
def _annulus_roots(family, sigma, l, count, printed=False):
    if family == "toroidal":
        func = lambda m: annulus_toroidal_det(sigma, l, m)  # noqa: E731
    elif printed:
        func = lambda m: annulus_poloidal_det(sigma, l, m)  # noqa: E731
    else:
        func = lambda m: poloidal_bc_det(sigma, l, m)  # noqa: E731
    step = scan_step(sigma)
    # every root exceeds pi/(1 - sigma), the l = 0 radial Dirichlet root
    return tuple(scan_roots(func, step, step, count))


def annulus_roots(family, sigma, l, count, printed=False):
    """First ``count`` roots mu of the annulus characteristic equation.

    For the poloidal family the boundary-condition determinant is used unless
    ``printed`` selects the half-integer 4x4 form (which shares its roots).
    """
    _check_family(family)
    _check_annulus(sigma)
    try:
        return _annulus_roots(family, float(sigma), int(l), _round_count(count), bool(printed))[:count]
    except ConvergenceError as exc:
        raise ConvergenceError(f"{family} l={l}: {exc}", interval=exc.interval) from exc


def annulus_toroidal_mode(sigma, l, k, j):
    _check_annulus(sigma)
    _check_degree(l, k)
    mu = annulus_roots("toroidal", sigma, l, j)[j - 1]
    m = annulus_toroidal_matrix(sigma, l, mu)
    scale = np.max(np.abs(m), axis=0)
    _, _, vt = np.linalg.svd(m / scale)
    a, b = vt[-1] / scale
    return _normalized(DomainSpec(sigma), "toroidal", l, k, j, mu, (a, b, 0.0, 0.0))


def annulus_poloidal_mode(sigma, l, k, j):
    _check_annulus(sigma)
    _check_degree(l, k)
    mu = annulus_roots("poloidal", sigma, l, j)[j - 1]
    m = poloidal_bc_matrix(sigma, l, mu)
    scale = np.max(np.abs(m), axis=0)
    ms = m / scale
    sys, rhs = ms[:, :3], -ms[:, 3]
    cond = np.linalg.cond(sys)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise IllConditionedError(
            f"poloidal annulus mode (sigma={sigma}, l={l}, j={j}, mu={mu:.15g}): "
            f"boundary system for (a, b, c) has condition number {cond:.3e}",
            condition=float(cond),
        )
    abc, *_ = np.linalg.lstsq(sys, rhs, rcond=None)
    coeffs = np.append(abc, 1.0) / scale
    return _normalized(DomainSpec(sigma), "poloidal", l, k, j, mu, coeffs)


def stokes_mode(domain, family, l, k, j):
    """Dispatch to the ball or annulus constructor."""
    _check_family(family)
    if j < 1:
        raise DomainError("radial index j is 1-based")
    if domain.is_ball:
        return (ball_toroidal_mode if family == "toroidal" else ball_poloidal_mode)(l, k, j)
    ctor = annulus_toroidal_mode if family == "toroidal" else annulus_poloidal_mode
    return ctor(domain.sigma, l, k, j)


def family_roots(domain, family, l, count):
    _check_family(family)
    _check_degree(l)
    if domain.is_ball:
        base = l if family == "toroidal" else l + 1
        return tuple(bessel_zero(base, j) for j in range(1, count + 1))
    return annulus_roots(family, domain.sigma, l, count)


# --- eigenvalue table -------------------------------------------------------

@dataclass(frozen=True)
class EigenEntry:
    lam: float
    mu: float
    family: str
    l: int
    j: int

    @property
    def multiplicity(self):
        return 2 * self.l + 1

    def sort_key(self):
        return (self.lam, FAMILIES.index(self.family), self.l, self.j)


@dataclass(frozen=True)
class EigenTable:
    domain: DomainSpec
    lmax: int
    entries: tuple
    truncated: bool = False

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def modes(self, limit=None):
        """Expand entries into individual modes k = -l..l, in table order."""
        out = []
        for e in self.entries:
            for k in range(-e.l, e.l + 1):
                if limit is not None and len(out) >= limit:
                    return out
                out.append(stokes_mode(self.domain, e.family, e.l, k, e.j))
        return out


def _fan_out(func, jobs):
    workers = worker_count()
    if workers <= 1 or len(jobs) <= 1:
        return [func(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: func(*job), jobs))


def eigen_table(domain, lmax, count=None, per_l=None):
    """Merged toroidal/poloidal eigenvalues for 1 <= l <= lmax, sorted.

    With ``per_l`` every (family, l) contributes its first ``per_l`` roots;
    with ``count`` the table holds the ``count`` smallest entries. A warning is
    issued when degree lmax + 1 would contribute below the last eigenvalue.
    """
    if lmax < 1:
        raise DomainError("lmax must be at least 1")
    if per_l is None and count is None:
        raise DomainError("give count or per_l")
    if (per_l is not None and per_l < 1) or (count is not None and count < 1):
        raise DomainError("counts must be positive")
    n = per_l if per_l is not None else count
    jobs = [(domain, fam, l, n) for l in range(1, lmax + 1) for fam in FAMILIES]
    roots = _fan_out(family_roots, jobs)
    entries = []
    for (_, fam, l, _), mus in zip(jobs, roots):
        entries.extend(EigenEntry(mu * mu, mu, fam, l, j) for j, mu in enumerate(mus, 1))
    entries.sort(key=EigenEntry.sort_key)
    if count is not None:
        entries = entries[:count]
    last = entries[-1].lam
    nxt = min(family_roots(domain, fam, lmax + 1, 1)[0] ** 2 for fam in FAMILIES)
    truncated = nxt < last
    if truncated:
        warnings.warn(
            f"eigen table truncated at lmax={lmax}: degree {lmax + 1} has an eigenvalue "
            f"{nxt:.6g} below the last tabulated {last:.6g}",
            stacklevel=2,
        )
    return EigenTable(domain, lmax, tuple(entries), truncated)


def first_modes(domain, n):
    """The first n modes counted with multiplicity, in table order."""
    lmax = 1
    while True:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            table = eigen_table(domain, lmax, count=n)
        total = sum(e.multiplicity for e in table)
        if not table.truncated and total >= n:
            return table.modes(n)
        lmax += 1


def boundary_max(mode, sphere):
    """Largest |u| on the boundary spheres, relative to the largest |u| over
    a radial sweep of the interior."""
    radii = [1.0] if mode.domain.is_ball else [mode.domain.sigma, 1.0]
    bmax = max(np.max(np.linalg.norm(mode.values_on_sphere(r, sphere), axis=0)) for r in radii)
    lo = mode.domain.sigma
    inner_r = lo + (1 - lo) * (np.arange(1, 40) / 40)
    imax = max(np.max(np.linalg.norm(mode.values_on_sphere(r, sphere), axis=0)) for r in inner_r)
    return float(bmax / imax)


__all__ = [
    "DomainSpec", "StokesMode", "EigenEntry", "EigenTable", "FAMILIES",
    "ball_toroidal_mode", "ball_poloidal_mode", "annulus_toroidal_det", "annulus_poloidal_det",
    "poloidal_bc_det", "annulus_toroidal_mode", "annulus_poloidal_mode", "annulus_roots",
    "stokes_mode", "eigen_table", "first_modes", "boundary_max", "radial_basis",
]

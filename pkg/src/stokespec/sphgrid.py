"""Quadrature grids on the unit sphere and on [sigma, 1], spherical harmonic
analysis/synthesis, and the radial differentiation matrix.

Coefficients are stored densely: slot ``l*l + l + k`` holds the (l, k)
coefficient for 0 <= l <= lmax, -l <= k <= l.
"""
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _backend
from .errors import ConfigurationError
from .specfun import degree_order_arrays, n_coeffs

GAUGE_TOL = 1e-10


def gauss_legendre(n, dtype=np.float64):
    """Gauss-Legendre nodes and weights on [-1, 1]; Newton-polished for
    extended precision dtypes."""
    x, w = np.polynomial.legendre.leggauss(n)
    if np.dtype(dtype) == np.float64:
        return x, w
    x = x.astype(dtype)
    for _ in range(4):
        p0 = np.ones_like(x)
        p1 = x.copy()
        for k in range(2, n + 1):
            p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
        dp = n * (x * p1 - p0) / (x * x - 1)
        x = x - p1 / dp
    w = 2 / ((1 - x * x) * dp * dp)
    return x, w


def barycentric_diff_matrix(x):
    """First-derivative matrix of the polynomial interpolant through ``x``."""
    x = np.asarray(x)
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1)
    # barycentric weights, rescaled to avoid under/overflow for larger n
    logw = -np.sum(np.log(np.abs(diff)), axis=1)
    sign = np.prod(np.sign(diff), axis=1)
    w = sign * np.exp(logw - logw.max())
    d = (w[None, :] / w[:, None]) / diff
    np.fill_diagonal(d, 0)
    np.fill_diagonal(d, -d.sum(axis=1))
    return d


@dataclass(frozen=True, eq=False)
class RadialGrid:
    sigma: float
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def n(self):
        return self.nodes.size

    @property
    def dtype(self):
        return self.nodes.dtype

    @cached_property
    def diff(self):
        return barycentric_diff_matrix(self.nodes)

    def derivative(self, f, axis=0):
        """Spectral d/dr of samples along ``axis``."""
        f = np.moveaxis(np.asarray(f), axis, 0)
        out = np.tensordot(self.diff, f, axes=(1, 0))
        return np.moveaxis(out, 0, axis)

    def spec(self):
        return {"sigma": float(self.sigma), "nr": self.n}


def build_radial_grid(sigma, n, dtype=np.float64):
    if not 0 <= sigma < 1:
        raise ConfigurationError(f"sigma out of range [0, 1): {sigma}")
    if n < 2:
        raise ConfigurationError(f"need at least 2 radial nodes, got {n}")
    x, w = gauss_legendre(n, dtype)
    sig = np.asarray(sigma, dtype=x.dtype)
    half = (1 - sig) / 2
    return RadialGrid(sigma=float(sigma), nodes=sig + half * (x + 1), weights=half * w)


@dataclass(frozen=True)
class HarmonicBasis:
    """Z, dZ/dtheta and (1/sin theta) dZ/dphi at the grid nodes, each of
    shape (ncoef, n_theta, n_phi)."""

    lmax: int
    z: np.ndarray
    dz_dtheta: np.ndarray
    dz_dphi_sin: np.ndarray


@dataclass(frozen=True, eq=False)
class SphereGrid:
    n_theta: int
    n_phi: int
    cos_theta: np.ndarray
    theta_weights: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @cached_property
    def theta(self):
        return np.arccos(self.cos_theta)

    @cached_property
    def sin_theta(self):
        return np.sqrt((1 - self.cos_theta) * (1 + self.cos_theta))

    @cached_property
    def phi(self):
        return 2 * np.pi * np.arange(self.n_phi) / self.n_phi

    @cached_property
    def weights(self):
        """Quadrature weights of shape (n_theta, n_phi); they sum to 4 pi."""
        return np.outer(self.theta_weights, np.full(self.n_phi, 2 * np.pi / self.n_phi))

    @property
    def max_degree(self):
        """Largest degree whose harmonics and products integrate exactly."""
        return min(self.n_theta - 1, (self.n_phi - 1) // 2)

    def check_degree(self, lmax):
        if lmax < 0 or lmax > self.max_degree:
            raise ConfigurationError(
                f"lmax={lmax} not resolved by a {self.n_theta}x{self.n_phi} grid "
                f"(need n_theta >= lmax+1 and n_phi >= 2*lmax+1; max is {self.max_degree})"
            )

    def basis(self, lmax):
        self.check_degree(lmax)
        if lmax not in self._cache:
            self._cache[lmax] = self._build_basis(lmax)
        return self._cache[lmax]

    def _build_basis(self, lmax):
        p, dp = _backend.legendre_table(lmax, self.cos_theta)
        ls, ks = degree_order_arrays(lmax)
        ka = np.abs(ks)
        trig = np.where(ks[:, None] >= 0, np.cos(ka[:, None] * self.phi), np.sin(ka[:, None] * self.phi))
        dtrig = np.where(ks[:, None] >= 0, -ka[:, None] * np.sin(ka[:, None] * self.phi),
                         ka[:, None] * np.cos(ka[:, None] * self.phi))
        pl = p[ls, ka]
        dpl = dp[ls, ka]
        z = pl[:, :, None] * trig[:, None, :]
        dz_dtheta = dpl[:, :, None] * trig[:, None, :]
        dz_dphi_sin = (pl / self.sin_theta)[:, :, None] * dtrig[:, None, :]
        return HarmonicBasis(lmax, z, dz_dtheta, dz_dphi_sin)

    def integrate(self, samples):
        """Quadrature over the sphere of the trailing (n_theta, n_phi) axes."""
        return np.tensordot(samples, self.weights, axes=([-2, -1], [0, 1]))

    def analyze(self, samples, lmax):
        """Harmonic coefficients of samples (..., n_theta, n_phi)."""
        b = self.basis(lmax)
        return np.tensordot(np.asarray(samples) * self.weights, b.z, axes=([-2, -1], [1, 2]))

    def synthesize(self, coeffs, lmax=None):
        coeffs = np.asarray(coeffs)
        if lmax is None:
            lmax = int(round(np.sqrt(coeffs.shape[-1]))) - 1
        b = self.basis(lmax)
        return np.tensordot(coeffs, b.z, axes=([-1], [0]))

    def spec(self):
        return {"ntheta": self.n_theta, "nphi": self.n_phi}


def build_sphere_grid(n_theta, n_phi):
    """Gauss-Legendre in cos(theta) times uniform longitudes."""
    if n_theta < 2 or n_phi < 4:
        raise ConfigurationError(f"sphere grid needs n_theta >= 2 and n_phi >= 4, got ({n_theta}, {n_phi})")
    t, w = gauss_legendre(n_theta)
    # north pole first
    return SphereGrid(n_theta=n_theta, n_phi=n_phi, cos_theta=t[::-1].copy(), theta_weights=w[::-1].copy())


@dataclass(frozen=True, eq=False)
class ShellGrid:
    radial: RadialGrid
    sphere: SphereGrid

    @property
    def sigma(self):
        return self.radial.sigma

    @property
    def shape(self):
        return (self.radial.n, self.sphere.n_theta, self.sphere.n_phi)

    @cached_property
    def volume_weights(self):
        r = self.radial.nodes
        return (self.radial.weights * r * r)[:, None, None] * self.sphere.weights[None, :, :]

    def integrate(self, samples):
        """Volume integral over the shell of samples (..., n_r, n_theta, n_phi)."""
        return np.tensordot(samples, self.volume_weights, axes=([-3, -2, -1], [0, 1, 2]))

    @property
    def max_degree(self):
        return self.sphere.max_degree

    def spec(self):
        return {**self.radial.spec(), **self.sphere.spec()}


def build_shell_grid(sigma, n_r, n_theta, n_phi, dtype=np.float64):
    return ShellGrid(build_radial_grid(sigma, n_r, dtype), build_sphere_grid(n_theta, n_phi))


class ScalarShellField:
    """Scalar function on a shell grid, held as samples or as per-radius
    harmonic coefficients (never both authoritative at once)."""

    def __init__(self, grid, samples=None, coeffs=None, lmax=None):
        if (samples is None) == (coeffs is None):
            raise ValueError("give exactly one of samples or coeffs")
        self.grid = grid
        if samples is not None:
            samples = np.asarray(samples)
            if samples.shape != grid.shape:
                raise ConfigurationError(f"samples shape {samples.shape} does not match grid {grid.shape}")
            self.samples = samples
            self.coeffs = None
            self.lmax = lmax
        else:
            coeffs = np.asarray(coeffs)
            if lmax is None:
                lmax = int(round(np.sqrt(coeffs.shape[-1]))) - 1
            if coeffs.shape != (grid.radial.n, n_coeffs(lmax)):
                raise ConfigurationError(f"coefficient shape {coeffs.shape} does not match lmax={lmax}")
            self.coeffs = coeffs
            self.samples = None
            self.lmax = lmax

    @property
    def representation(self):
        return "samples" if self.samples is not None else "coefficients"

    @classmethod
    def from_function(cls, grid, func):
        """Sample ``func(r, theta, phi)`` (broadcasting) on the grid."""
        r = grid.radial.nodes[:, None, None]
        th = grid.sphere.theta[None, :, None]
        ph = grid.sphere.phi[None, None, :]
        vals = np.broadcast_to(func(r, th, ph), grid.shape)
        return cls(grid, samples=np.array(vals))

    def to_coefficients(self, lmax=None):
        if self.coeffs is not None and (lmax is None or lmax == self.lmax):
            return self
        if self.coeffs is not None:
            return self.to_samples().to_coefficients(lmax)
        return sh_analyze(self, self.grid.max_degree if lmax is None else lmax)

    def to_samples(self):
        if self.samples is not None:
            return self
        return sh_synthesize(self)

    def coefficient(self, l, k):
        c = self.to_coefficients().coeffs
        return c[:, l * l + l + k]


def sh_analyze(f, lmax):
    """Per-radius coefficients f_{l,k}(r_i) by quadrature."""
    if f.samples is None:
        raise ValueError("sh_analyze expects a sampled field")
    f.grid.sphere.check_degree(lmax)
    return ScalarShellField(f.grid, coeffs=f.grid.sphere.analyze(f.samples, lmax), lmax=lmax)


def sh_synthesize(f):
    if f.coeffs is None:
        raise ValueError("sh_synthesize expects a coefficient field")
    return ScalarShellField(f.grid, samples=f.grid.sphere.synthesize(f.coeffs, f.lmax), lmax=f.lmax)


def radial_mean(f, r_index=None):
    """Shell average (1/4 pi) of f over the unit sphere at one or all radial
    nodes; equals f_{0,0}(r) / sqrt(4 pi)."""
    if f.samples is not None:
        means = f.grid.sphere.integrate(f.samples) / (4 * np.pi)
    else:
        means = f.coeffs[:, 0] / np.sqrt(4 * np.pi)
    return means if r_index is None else means[r_index]


def is_gauged(f, tol=GAUGE_TOL):
    """True when the (0, 0) coefficient vanishes at every radial node."""
    c = f.to_coefficients(0 if f.samples is not None else None).coeffs
    return bool(np.all(np.abs(c[:, 0]) < tol))

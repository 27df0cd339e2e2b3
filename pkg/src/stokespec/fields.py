"""Vector fields on a shell grid in the spherical frame (u_r, u_theta, u_phi).

Internally a band-limited field is expanded as

    u = sum_lk  U_lk(r) Z e_r + V_lk(r) grad_w Z + W_lk(r) curl_w Z

with grad_w, curl_w the surface operators on the unit sphere. In these
coordinates a toroidal field curl(psi x) has W = psi and U = V = 0, and a
poloidal field curl curl(chi x) has U = l(l+1) chi / r, V = (r chi)'/r.
All vector calculus below acts on (U, V, W) per mode; radial derivatives
go through the grid's differentiation matrix.
"""
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, GaugeViolationError, NotSolenoidalError
from .sphgrid import ScalarShellField
from .specfun import degree_order_arrays
from .surfcalc import grad_curl_analysis, grad_curl_synthesis

SOLENOIDAL_TOL = 1e-8


class VectorShellField:
    def __init__(self, grid, values, solenoidal=False):
        values = np.asarray(values)
        if values.shape != (3,) + grid.shape:
            raise ConfigurationError(f"vector field shape {values.shape} does not match grid {(3,) + grid.shape}")
        self.grid = grid
        self.values = values
        self.solenoidal = solenoidal

    @property
    def r(self):
        return self.values[0]

    @property
    def theta(self):
        return self.values[1]

    @property
    def phi(self):
        return self.values[2]

    def __add__(self, other):
        return VectorShellField(self.grid, self.values + other.values, self.solenoidal and other.solenoidal)

    def __sub__(self, other):
        return VectorShellField(self.grid, self.values - other.values, self.solenoidal and other.solenoidal)

    def __mul__(self, c):
        return VectorShellField(self.grid, self.values * c, self.solenoidal)

    __rmul__ = __mul__

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros((3,) + grid.shape), solenoidal=True)

    @classmethod
    def from_cartesian(cls, grid, func):
        """Sample a Cartesian field ``func(x, y, z) -> (ux, uy, uz)``."""
        r = grid.radial.nodes[:, None, None]
        th = grid.sphere.theta[None, :, None]
        ph = grid.sphere.phi[None, None, :]
        st, ct, sp, cp = np.sin(th), np.cos(th), np.sin(ph), np.cos(ph)
        x, y, z = r * st * cp, r * st * sp, r * ct
        ux, uy, uz = (np.broadcast_to(c, grid.shape) for c in func(x, y, z))
        ur = st * cp * ux + st * sp * uy + ct * uz
        ut = ct * cp * ux + ct * sp * uy - st * uz
        up = -sp * ux + cp * uy
        return cls(grid, np.array([np.broadcast_to(c, grid.shape) for c in (ur, ut, up)]))


@dataclass
class Spectral:
    """(U, V, W) mode profiles on the radial nodes, each (n_r, ncoef)."""

    U: np.ndarray
    V: np.ndarray
    W: np.ndarray
    lmax: int

    def __add__(self, other):
        return Spectral(self.U + other.U, self.V + other.V, self.W + other.W, self.lmax)

    def __sub__(self, other):
        return Spectral(self.U - other.U, self.V - other.V, self.W - other.W, self.lmax)

    def __neg__(self):
        return Spectral(-self.U, -self.V, -self.W, self.lmax)

    def __mul__(self, c):
        return Spectral(c * self.U, c * self.V, c * self.W, self.lmax)

    __rmul__ = __mul__

    def radial_part(self, radial):
        """Coefficients of x.u, i.e. r U."""
        return radial.nodes[:, None] * self.U


def spec_norm(s, radial):
    """L2 norm over the shell from (U, V, W); grad Z and curl Z have squared
    norm l(l+1) on the unit sphere and are mutually orthogonal."""
    lam = _eigs(s.lmax)
    dens = np.sum(s.U ** 2 + lam * (s.V ** 2 + s.W ** 2), axis=-1)
    r = radial.nodes
    return float(np.sqrt(max(np.sum(radial.weights * r * r * dens), 0)))


def scalar_spec_norm(c, radial):
    r = radial.nodes
    return float(np.sqrt(max(np.sum(radial.weights * r * r * np.sum(c * c, axis=-1)), 0)))


@dataclass
class Potentials:
    psi: ScalarShellField
    chi: ScalarShellField


def _eigs(lmax):
    ls, _ = degree_order_arrays(lmax)
    return ls * (ls + 1.0)


def _lmax(grid, lmax):
    if lmax is None:
        return grid.max_degree
    grid.sphere.check_degree(lmax)
    return lmax


def vsh_analyze(u, lmax=None):
    lmax = _lmax(u.grid, lmax)
    sph = u.grid.sphere
    U = sph.analyze(u.values[0], lmax)
    V, W = grad_curl_analysis(sph, lmax, u.values[1], u.values[2])
    return Spectral(U, V, W, lmax)


def vsh_synthesize(grid, s, solenoidal=False):
    sph = grid.sphere
    ur = sph.synthesize(s.U, s.lmax)
    ut, up = grad_curl_synthesis(sph, s.lmax, s.V, s.W)
    return VectorShellField(grid, np.array([ur, ut, up]), solenoidal)


# --- per-mode operators -----------------------------------------------------

def spec_curl(s, radial):
    r = radial.nodes[:, None]
    lam = _eigs(s.lmax)
    d = radial.derivative
    return Spectral(lam * s.W / r, d(r * s.W) / r, (s.U - d(r * s.V)) / r, s.lmax)


def spec_div(s, radial):
    r = radial.nodes[:, None]
    return radial.derivative(r * r * s.U) / (r * r) - _eigs(s.lmax) * s.V / r


def spec_grad(f, radial, lmax):
    r = radial.nodes[:, None]
    return Spectral(radial.derivative(f), f / r, np.zeros_like(f), lmax)


def spec_scalar_laplacian(f, radial, lmax):
    r = radial.nodes[:, None]
    d = radial.derivative
    return d(d(r * f)) / r - _eigs(lmax) * f / (r * r)


def spec_vector_laplacian(s, radial):
    r = radial.nodes[:, None]
    lam = _eigs(s.lmax)
    lap = lambda f: spec_scalar_laplacian(f, radial, s.lmax)  # noqa: E731
    return Spectral(
        lap(s.U) - 2 * s.U / (r * r) + 2 * lam * s.V / (r * r),
        lap(s.V) + 2 * s.U / (r * r),
        lap(s.W),
        s.lmax,
    )


def spec_toroidal(psi_coeffs, lmax):
    z = np.zeros_like(psi_coeffs)
    return Spectral(z, z.copy(), psi_coeffs, lmax)


def spec_poloidal(chi_coeffs, radial, lmax):
    r = radial.nodes[:, None]
    return Spectral(_eigs(lmax) * chi_coeffs / r, radial.derivative(r * chi_coeffs) / r,
                    np.zeros_like(chi_coeffs), lmax)


# --- field level API ----------------------------------------------------------

def curl(u, lmax=None):
    s = vsh_analyze(u, lmax)
    return vsh_synthesize(u.grid, spec_curl(s, u.grid.radial), solenoidal=True)


def divergence(u, lmax=None):
    s = vsh_analyze(u, lmax)
    return ScalarShellField(u.grid, coeffs=spec_div(s, u.grid.radial), lmax=s.lmax)


def gradient(f, lmax=None):
    c = f.to_coefficients(lmax)
    return vsh_synthesize(f.grid, spec_grad(c.coeffs, f.grid.radial, c.lmax))


def vector_laplacian(u, lmax=None):
    s = vsh_analyze(u, lmax)
    return vsh_synthesize(u.grid, spec_vector_laplacian(s, u.grid.radial))


def _gauged_coeffs(f, what, gauge="check", tol=1e-10):
    c = f.to_coefficients()
    if gauge == "project":
        coeffs = c.coeffs.copy()
        coeffs[:, 0] = 0
        return ScalarShellField(c.grid, coeffs=coeffs, lmax=c.lmax)
    if gauge != "check":
        raise ValueError(f"gauge must be 'check' or 'project', got {gauge!r}")
    mean = float(np.max(np.abs(c.coeffs[:, 0])))
    scale = max(1.0, float(np.max(np.abs(c.coeffs))))
    if mean > tol * scale:
        raise GaugeViolationError(
            f"{what} potential must have vanishing shell means (mean-value gauge); |f_00| reaches {mean:.3e}",
            measured=mean,
        )
    return c


def assemble_toroidal(psi, gauge="check"):
    """Toroidal field curl(psi x) = (0, (1/sin) dpsi/dphi, -dpsi/dtheta).

    ``gauge="project"`` drops the shell means of psi instead of rejecting
    them; they do not contribute to the field.
    """
    c = _gauged_coeffs(psi, "toroidal", gauge)
    return vsh_synthesize(c.grid, spec_toroidal(c.coeffs, c.lmax), solenoidal=True)


def assemble_poloidal(chi, gauge="check"):
    """Poloidal field curl curl(chi x) = (1/r)(B chi, d/dtheta d(r chi)/dr, (1/sin) d/dphi d(r chi)/dr)."""
    c = _gauged_coeffs(chi, "poloidal", gauge)
    return vsh_synthesize(c.grid, spec_poloidal(c.coeffs, c.grid.radial, c.lmax), solenoidal=True)


def radial_projection(u):
    """x . u = r u_r as a sampled scalar field."""
    r = u.grid.radial.nodes[:, None, None]
    return ScalarShellField(u.grid, samples=r * u.values[0])


def inner(u, v):
    """L2 inner product over the shell."""
    return float(u.grid.integrate(np.sum(u.values * v.values, axis=0)))


def norm(u):
    return float(np.sqrt(max(inner(u, u), 0.0)))


def scalar_norm(f):
    f = f.to_samples()
    return float(np.sqrt(max(f.grid.integrate(f.samples ** 2), 0.0)))


def frame_matrix(theta, phi):
    """Rows are e_r, e_theta, e_phi in Cartesian components; maps Cartesian
    components to spherical ones. Its transpose maps back."""
    st, ct, sp, cp = np.sin(theta), np.cos(theta), np.sin(phi), np.cos(phi)
    return np.array([
        [st * cp, st * sp, ct],
        [ct * cp, ct * sp, -st],
        [-sp, cp, 0.0 * theta],
    ])


def frame_transform(vec, direction, theta, phi):
    t = frame_matrix(theta, phi)
    if direction == "cartesian->spherical":
        return t @ np.asarray(vec)
    if direction == "spherical->cartesian":
        return t.T @ np.asarray(vec)
    raise ValueError(f"unknown direction {direction!r}")


def cartesian_components(u):
    """(u_x, u_y, u_z) sampled on the grid, shape (3, n_r, n_theta, n_phi)."""
    th = u.grid.sphere.theta[:, None]
    ph = u.grid.sphere.phi[None, :]
    t = frame_matrix(th + 0 * ph, ph + 0 * th)  # (3, 3, n_theta, n_phi)
    return np.einsum("ji...,j...->i...", t, u.values)


def dirichlet_product(u, v, lmax=None):
    """sum_i (grad u_i, grad v_i) over the shell, Cartesian components i."""
    a, b = cartesian_components(u), cartesian_components(v)
    total = 0.0
    for i in range(3):
        ga = gradient(ScalarShellField(u.grid, samples=a[i]), lmax)
        gb = gradient(ScalarShellField(v.grid, samples=b[i]), lmax)
        total += inner(ga, gb)
    return total


def shell_flux_scale(u):
    vol = u.grid.integrate(np.ones(u.grid.shape))
    return norm(u) / np.sqrt(vol)


def check_solenoidal(u, lmax=None, tol=SOLENOIDAL_TOL):
    """Tag ``u`` solenoidal after measuring its divergence and its shell
    fluxes; raises NotSolenoidalError / GaugeViolationError otherwise."""
    unorm = norm(u)
    if unorm == 0:
        return VectorShellField(u.grid, u.values, solenoidal=True)
    s = vsh_analyze(u, lmax)
    div = ScalarShellField(u.grid, coeffs=spec_div(s, u.grid.radial), lmax=s.lmax)
    rel = scalar_norm(div) / unorm
    if rel > tol:
        raise NotSolenoidalError(f"field is not solenoidal: relative divergence {rel:.3e} > {tol:.1e}", measured=rel)
    r = u.grid.radial.nodes[:, None]
    flux = np.max(np.abs(r[:, 0] * s.U[:, 0])) / np.sqrt(4 * np.pi)
    if flux > tol * shell_flux_scale(u):
        raise GaugeViolationError(
            f"shell means of x.u do not vanish (max {flux:.3e}); "
            "multiples of grad(1/|x|) carry flux through the spheres and are excluded by the zero-flux gauge",
            measured=float(flux),
        )
    return VectorShellField(u.grid, u.values, solenoidal=True)

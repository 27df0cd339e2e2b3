"""Surface calculus on the unit sphere and the scalar Laplacian on a shell.

Angular derivatives are taken on harmonic expansions (exact for
band-limited data); radial ones use the barycentric differentiation matrix
of the radial grid.
"""
from dataclasses import dataclass

import numpy as np

from .errors import GaugeViolationError
from .sphgrid import GAUGE_TOL, ScalarShellField
from .specfun import degree_order_arrays


@dataclass
class TangentField:
    """Tangential vector field (b_theta, b_phi) on sphere grid nodes; arrays
    of shape (..., n_theta, n_phi)."""

    grid: object
    theta: np.ndarray
    phi: np.ndarray


def _eigs(lmax):
    ls, _ = degree_order_arrays(lmax)
    return ls * (ls + 1.0)


def grad_curl_synthesis(grid, lmax, v, w):
    """Tangential field sum_lk v_lk grad Z + w_lk curl Z.

    grad Z = (dZ/dtheta, dZ/dphi / sin), curl Z = (dZ/dphi / sin, -dZ/dtheta).
    """
    b = grid.basis(lmax)
    bt = np.tensordot(v, b.dz_dtheta, axes=([-1], [0])) + np.tensordot(w, b.dz_dphi_sin, axes=([-1], [0]))
    bp = np.tensordot(v, b.dz_dphi_sin, axes=([-1], [0])) - np.tensordot(w, b.dz_dtheta, axes=([-1], [0]))
    return bt, bp


def grad_curl_analysis(grid, lmax, bt, bp):
    """Inverse of grad_curl_synthesis for band-limited fields. The l = 0
    slots are zero (neither gradient nor curl has an l = 0 part)."""
    b = grid.basis(lmax)
    wt = np.asarray(bt) * grid.weights
    wp = np.asarray(bp) * grid.weights
    ax = ([-2, -1], [1, 2])
    gv = np.tensordot(wt, b.dz_dtheta, axes=ax) + np.tensordot(wp, b.dz_dphi_sin, axes=ax)
    gw = np.tensordot(wt, b.dz_dphi_sin, axes=ax) - np.tensordot(wp, b.dz_dtheta, axes=ax)
    lam = _eigs(lmax)
    inv = np.zeros_like(lam)
    inv[1:] = 1 / lam[1:]
    return gv * inv, gw * inv


def _lmax_for(grid, lmax):
    return grid.max_degree if lmax is None else lmax


def surface_gradient(zeta, grid, lmax=None):
    """(d zeta/d theta, (1/sin theta) d zeta/d phi) from the harmonic expansion."""
    lmax = _lmax_for(grid, lmax)
    c = grid.analyze(zeta, lmax)
    bt, bp = grad_curl_synthesis(grid, lmax, c, np.zeros_like(c))
    return TangentField(grid, bt, bp)


def surface_curl(zeta, grid, lmax=None):
    """((1/sin theta) d zeta/d phi, -d zeta/d theta)."""
    lmax = _lmax_for(grid, lmax)
    c = grid.analyze(zeta, lmax)
    bt, bp = grad_curl_synthesis(grid, lmax, np.zeros_like(c), c)
    return TangentField(grid, bt, bp)


def surface_divergence(b, lmax=None):
    """Surface divergence of a tangent field, via its gradient/curl split."""
    grid = b.grid
    lmax = _lmax_for(grid, lmax)
    v, _ = grad_curl_analysis(grid, lmax, b.theta, b.phi)
    return grid.synthesize(-_eigs(lmax) * v, lmax)


def tangent_inner(a, b):
    """L2(omega) inner product of two tangent fields."""
    return a.grid.integrate(a.theta * b.theta + a.phi * b.phi)


def laplace_beltrami(f):
    """Apply B = -div grad on the sphere: multiplies each coefficient by l(l+1).

    Accepts a ScalarShellField and returns one in the same representation.
    """
    c = f.to_coefficients()
    out = ScalarShellField(c.grid, coeffs=c.coeffs * _eigs(c.lmax), lmax=c.lmax)
    return out if f.representation == "coefficients" else out.to_samples()


def laplace_beltrami_invert(f, tol=GAUGE_TOL):
    """Inverse of B on mean-zero functions; the result has zero mean too."""
    c = f.to_coefficients()
    mean = np.max(np.abs(c.coeffs[:, 0]))
    if mean >= tol:
        raise GaugeViolationError(
            f"Laplace-Beltrami inverse needs vanishing shell means; |f_00| reaches {mean:.3e}",
            measured=float(mean),
        )
    lam = _eigs(c.lmax)
    inv = np.zeros_like(lam)
    inv[1:] = 1 / lam[1:]
    out = ScalarShellField(c.grid, coeffs=c.coeffs * inv, lmax=c.lmax)
    return out if f.representation == "coefficients" else out.to_samples()


def radial_laplacian(coeffs, radial, lmax):
    """Per-mode (1/r) d^2(r f)/dr^2 - l(l+1) f / r^2 on coefficient arrays
    of shape (n_r, ncoef)."""
    r = radial.nodes[:, None]
    rf = r * coeffs
    d2 = radial.derivative(radial.derivative(rf))
    return d2 / r - _eigs(lmax) * coeffs / (r * r)


def scalar_laplacian(f):
    c = f.to_coefficients()
    return ScalarShellField(c.grid, coeffs=radial_laplacian(c.coeffs, c.grid.radial, c.lmax), lmax=c.lmax)

"""Toroidal/poloidal splitting of solenoidal fields on a shell.

On each sphere r = const the potentials solve B psi = x.curl u and
B chi = x.u, with B the Laplace-Beltrami operator, inverted on functions of
zero mean. In vector harmonic coefficients x.u = r U and x.curl u = l(l+1) W,
so psi = W and chi = r U / l(l+1) mode by mode.
"""
from dataclasses import dataclass

import numpy as np

from .errors import GaugeViolationError
from .fields import (
    Potentials, VectorShellField, check_solenoidal, norm, shell_flux_scale, spec_curl,
    spec_poloidal, spec_toroidal, vsh_analyze, vsh_synthesize,
)
from .specfun import degree_order_arrays
from .sphgrid import ScalarShellField

GAUGE_TOL = 1e-8


@dataclass
class DecompositionResult:
    potentials: Potentials
    toroidal: VectorShellField
    poloidal: VectorShellField
    residual: float
    gauge_report: dict
    lmax: int

    def energy(self):
        """Squared L2 norms of u's toroidal and poloidal parts."""
        return {"toroidal": norm(self.toroidal) ** 2, "poloidal": norm(self.poloidal) ** 2}


def _invert_beltrami(coeffs, lmax):
    ls, _ = degree_order_arrays(lmax)
    inv = np.zeros(ls.shape)
    inv[1:] = 1.0 / (ls[1:] * (ls[1:] + 1.0))
    return coeffs * inv


def decompose(u, lmax=None, tol=GAUGE_TOL):
    """Potentials and parts of a solenoidal field.

    Fields not yet tagged solenoidal are checked first. Raises
    GaugeViolationError when x.u has nonzero shell means (for example
    multiples of grad(1/|x|) on a shell), NotSolenoidalError when the
    divergence is not negligible, ConfigurationError when ``lmax`` exceeds
    what the grid resolves.
    """
    grid = u.grid
    lmax = grid.max_degree if lmax is None else lmax
    grid.sphere.check_degree(lmax)
    if not u.solenoidal:
        u = check_solenoidal(u, lmax, tol)
    s = vsh_analyze(u, lmax)
    r = grid.radial.nodes[:, None]
    xu = r * s.U
    xcu = r * spec_curl(s, grid.radial).U
    flux = float(np.max(np.abs(xu[:, 0])))
    scale = shell_flux_scale(u) * np.sqrt(4 * np.pi)
    if flux > tol * max(scale, np.finfo(float).tiny):
        raise GaugeViolationError(
            f"shell means of x.u do not vanish (max |(x.u)_00| = {flux:.3e}); "
            "the splitting needs zero flux through every sphere",
            measured=flux,
        )
    psi = _invert_beltrami(xcu, lmax)
    chi = _invert_beltrami(xu, lmax)
    tor = vsh_synthesize(grid, spec_toroidal(psi, lmax), solenoidal=True)
    pol = vsh_synthesize(grid, spec_poloidal(chi, grid.radial, lmax), solenoidal=True)
    unorm = norm(u)
    diff = norm(u - tor - pol)
    residual = diff / unorm if unorm > 0 else diff
    report = {
        "psi": float(np.max(np.abs(psi[:, 0]))),
        "chi": float(np.max(np.abs(chi[:, 0]))),
        "x_dot_u": flux,
    }
    pots = Potentials(ScalarShellField(grid, coeffs=psi, lmax=lmax),
                      ScalarShellField(grid, coeffs=chi, lmax=lmax))
    return DecompositionResult(pots, tor, pol, float(residual), report, lmax)


def recompose(result):
    return result.toroidal + result.poloidal

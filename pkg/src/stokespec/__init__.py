"""Stokes eigenmodes with no-slip walls on the unit ball and on spherical
shells, plus the toroidal/poloidal splitting of solenoidal fields."""
from ._backend import BACKEND
from .errors import (
    ConfigurationError, ConvergenceError, DomainError, GaugeViolationError, IllConditionedError,
    NotSolenoidalError, ParseError, StokespecError,
)
from .fields import (
    Potentials, VectorShellField, assemble_poloidal, assemble_toroidal, check_solenoidal, curl,
    divergence, frame_transform, gradient, radial_projection, vector_laplacian,
)
from .mie import DecompositionResult, decompose, recompose
from .specfun import (
    HalfIntegerOrder, HarmonicIndex, assoc_legendre, bessel_half, bessel_zero, sph_harmonic,
)
from .spectrum import (
    DomainSpec, EigenTable, StokesMode, annulus_poloidal_det, annulus_poloidal_mode,
    annulus_toroidal_det, annulus_toroidal_mode, ball_poloidal_mode, ball_toroidal_mode,
    eigen_table, stokes_mode,
)
from .sphgrid import ScalarShellField, ShellGrid, build_shell_grid, build_sphere_grid
from .verify import (
    VerificationReport, identity_suite, orthogonality_matrix, projection_completeness,
    scalar_problem_residuals,
)

__version__ = "0.1.0"

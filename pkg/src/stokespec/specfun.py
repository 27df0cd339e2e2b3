"""Special functions: associated Legendre functions, real surface harmonics,
half-integer order Bessel functions and their positive zeros.

Conventions
-----------
``P_l^k(t) = (-1)^(l+k) / (2^l l!) (1-t^2)^(k/2) d^(l+k)/dt^(l+k) (1-t^2)^l``,
which equals the Condon-Shortley phased Rodrigues form, so P_1^1 = -sqrt(1-t^2).

The real harmonics are addressed by a signed order: ``Z_l^k`` with k >= 0 is
the cosine branch ``N_lk cos(k phi) P_l^k(cos theta)``, k < 0 the sine branch
``N_l|k| sin(|k| phi) P_l^|k|(cos theta)``, normalized to unit L2 norm on the
unit sphere.
"""
from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np

from . import _backend
from .errors import ConvergenceError, DomainError


@dataclass(frozen=True)
class HarmonicIndex:
    l: int
    k: int

    def __post_init__(self):
        if self.l < 0 or abs(self.k) > self.l:
            raise DomainError(f"invalid harmonic index (l={self.l}, k={self.k}): need |k| <= l, l >= 0")

    @property
    def eigenvalue(self):
        """Eigenvalue l(l+1) of the Laplace-Beltrami operator."""
        return self.l * (self.l + 1)

    @property
    def multiplicity(self):
        return 2 * self.l + 1

    @property
    def flat(self):
        """Position in the dense coefficient layout l^2 + l + k."""
        return self.l * self.l + self.l + self.k


def n_coeffs(lmax):
    return (lmax + 1) ** 2


def degree_order_arrays(lmax):
    """Degree and signed order of each slot in the dense coefficient layout."""
    ls = np.repeat(np.arange(lmax + 1), 2 * np.arange(lmax + 1) + 1)
    ks = np.concatenate([np.arange(-l, l + 1) for l in range(lmax + 1)])
    return ls, ks


@dataclass(frozen=True)
class HalfIntegerOrder:
    """Order +(base + 1/2) or -(base + 1/2)."""

    base: int
    sign: int = 1

    def __post_init__(self):
        if self.base < 0 or self.sign not in (1, -1):
            raise DomainError(f"invalid half-integer order (base={self.base}, sign={self.sign})")

    @property
    def n(self):
        """Integer n with order n + 1/2."""
        return self.base if self.sign > 0 else -self.base - 1

    @property
    def nu(self):
        return self.n + 0.5


def _as_order(order):
    if isinstance(order, HalfIntegerOrder):
        return order
    return HalfIntegerOrder(int(order), 1)


def assoc_legendre(l, k, t):
    """Unnormalized P_l^k(t) by upward recurrence in l from the diagonal."""
    if k < 0 or k > l:
        raise DomainError(f"assoc_legendre needs 0 <= k <= l, got l={l}, k={k}")
    t_arr = np.asarray(t, dtype=float)
    if np.any(np.abs(t_arr) > 1):
        raise DomainError("assoc_legendre argument must satisfy |t| <= 1")
    s = np.sqrt((1 - t_arr) * (1 + t_arr))
    # P_k^k = (-1)^k (2k-1)!! (1-t^2)^(k/2)
    pkk = np.ones_like(t_arr)
    for m in range(1, k + 1):
        pkk = -(2 * m - 1) * s * pkk
    if l == k:
        return pkk if pkk.ndim else float(pkk)
    prev, cur = pkk, (2 * k + 1) * t_arr * pkk
    for n in range(k + 2, l + 1):
        prev, cur = cur, ((2 * n - 1) * t_arr * cur - (n + k - 1) * prev) / (n - k)
    return cur if cur.ndim else float(cur)


def harmonic_norm(l, k):
    """Normalization factor N_lk of Z_l^{+-k}, k >= 0."""
    k = abs(k)
    delta = 2.0 if k == 0 else 1.0
    return math.sqrt(math.factorial(l - k) * (2 * l + 1) / (delta * math.factorial(l + k) * 2 * math.pi))


def sph_harmonic(idx, theta, phi):
    """Z_l^k(theta, phi) for a HarmonicIndex (or an (l, k) pair)."""
    if not isinstance(idx, HarmonicIndex):
        idx = HarmonicIndex(*idx)
    theta, phi = np.broadcast_arrays(np.asarray(theta, dtype=float), np.asarray(phi, dtype=float))
    if np.any(theta < 0) or np.any(theta > np.pi):
        raise DomainError("colatitude must lie in [0, pi]")
    k = abs(idx.k)
    p = harmonic_norm(idx.l, k) * assoc_legendre(idx.l, k, np.cos(theta))
    trig = np.cos(k * phi) if idx.k >= 0 else np.sin(k * phi)
    out = p * trig
    return out if out.ndim else float(out)


def jhalf(n, x):
    """J_{n+1/2}(x) for integer n (either sign) and x > 0."""
    x = np.asarray(x)
    if np.any(x <= 0):
        raise DomainError("Bessel argument must be positive")
    out = _backend.jhalf_range(n, n, x)[0]
    return out if out.ndim else out[()]


def jhalf_deriv(n, x):
    """d/dx J_{n+1/2}(x) = (J_{n-1/2} - J_{n+3/2}) / 2."""
    x = np.asarray(x)
    if np.any(x <= 0):
        raise DomainError("Bessel argument must be positive")
    tab = _backend.jhalf_range(n - 1, n + 1, x)
    out = 0.5 * (tab[0] - tab[2])
    return out if out.ndim else out[()]


def bessel_half(order, x):
    """J_{+-(l+1/2)}(x) for a HalfIntegerOrder."""
    return jhalf(_as_order(order).n, x)


def bessel_half_deriv(order, x):
    return jhalf_deriv(_as_order(order).n, x)


def bisect_root(func, lo, hi, flo=None, rtol=1e-15, maxiter=200):
    """Bisection on a sign-changing bracket, to ~machine precision."""
    if flo is None:
        flo = func(lo)
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= rtol * abs(mid):
            break
        fmid = func(mid)
        if fmid == 0:
            return mid
        if (fmid < 0) == (flo < 0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def scan_roots(func, start, step, count, max_steps=100000):
    """First ``count`` sign changes of ``func`` on a uniform scan, refined by
    bisection. Raises ConvergenceError if the budget runs out."""
    roots = []
    a = start
    fa = func(a)
    for _ in range(max_steps):
        b = a + step
        fb = func(b)
        if fb == 0:
            roots.append(b)
            b += 1e-12 * step
            fb = func(b)
        elif (fa < 0) != (fb < 0):
            roots.append(bisect_root(func, a, b, fa))
        if len(roots) >= count:
            return roots[:count]
        a, fa = b, fb
    raise ConvergenceError(
        f"found {len(roots)} of {count} roots scanning [{start}, {a}]", interval=(start, a)
    )


@lru_cache(maxsize=None)
def _bessel_zeros(base, count):
    start = float(max(1, base))
    return tuple(scan_roots(lambda x: float(jhalf(base, x)), start, math.pi / 4, count))


def bessel_zero(order, j):
    """j-th positive zero (1-based) of J_{l+1/2}."""
    order = _as_order(order)
    if order.sign < 0:
        raise DomainError("zeros are provided for positive orders only")
    if j < 1:
        raise DomainError("zero index j is 1-based")
    # compute a few extra so repeated calls with growing j hit the cache
    count = max(j, 8)
    count = 1 << (count - 1).bit_length()
    return _bessel_zeros(order.base, count)[j - 1]

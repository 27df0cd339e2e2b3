"""Pure numpy implementations of the recurrence kernels.

These mirror the compiled kernels in ``_ckernels.pyx`` one for one and also
serve every non-float64 dtype (``np.longdouble`` in particular), since the
compiled versions are double precision only.
"""
import numpy as np

_RESCALE = 1e200


def _pi(dtype):
    if np.dtype(dtype) == np.dtype(np.longdouble):
        return np.longdouble("3.14159265358979323846264338327950288")
    return np.pi


def jhalf_range(nlo, nhi, x):
    """Table of J_{n+1/2}(x) for integer n in [nlo, nhi].

    Returns an array of shape ``(nhi - nlo + 1,) + x.shape``. Negative n are
    reached by downward recurrence from J_{-1/2}, J_{1/2} (stable there);
    positive n by upward recurrence where the order stays below the argument
    and by Miller's backward recurrence elsewhere.
    """
    x = np.asarray(x)
    if not np.issubdtype(x.dtype, np.floating):
        x = x.astype(np.float64)
    if nhi < nlo:
        raise ValueError("empty order range")
    shape = x.shape
    xf = x.reshape(-1)
    if np.any(xf <= 0):
        raise ValueError("argument must be positive")
    dtype = xf.dtype
    pref = np.sqrt(2 / (_pi(dtype) * xf))
    j0 = pref * np.sin(xf)   # n = 0, order 1/2
    jm1 = pref * np.cos(xf)  # n = -1, order -1/2

    out = np.empty((nhi - nlo + 1, xf.size), dtype=dtype)

    # negative orders: J_{v-1} = (2v/x) J_v - J_{v+1}
    if nlo <= -1:
        up, cur = j0, jm1
        n = -1
        while n >= nlo:
            if n <= nhi:
                out[n - nlo] = cur
            nu = n + 0.5
            up, cur = cur, (2 * nu / xf) * cur - up
            n -= 1

    top = max(nhi, 0)
    if nhi >= 0:
        pos = _jhalf_positive(top, xf, j0, jm1)
        for n in range(max(nlo, 0), nhi + 1):
            out[n - nlo] = pos[n]
    return out.reshape((nhi - nlo + 1,) + shape)


def _jhalf_positive(top, x, j0, jm1):
    """J_{n+1/2}(x) for n = 0..top, shape (top + 1, x.size)."""
    res = np.empty((top + 1, x.size), dtype=x.dtype)
    upward = x > top + 0.5
    if np.any(upward):
        xu = x[upward]
        prev, cur = jm1[upward], j0[upward]
        res[0, upward] = cur
        for n in range(0, top):
            nu = n + 0.5
            prev, cur = cur, (2 * nu / xu) * cur - prev
            res[n + 1, upward] = cur
    down = ~upward
    if np.any(down):
        xd = x[down]
        res[:, down] = _miller(top, xd, j0[down], jm1[down])
    return res


def _miller(top, x, j0, jm1):
    m = max(float(top), float(np.max(x)))
    start = int(m + 30 + 4 * np.sqrt(m))
    vals = np.zeros((top + 1, x.size), dtype=x.dtype)
    nxt = np.zeros_like(x)        # f_{start+1}
    cur = np.full_like(x, 1e-30)  # f_{start}
    n = start
    # f_{n-1} = (2(n+1/2)/x) f_n - f_{n+1}, down to n = -1
    while n >= 0:
        if n <= top:
            vals[n] = cur
        prv = (2 * (n + 0.5) / x) * cur - nxt
        nxt, cur = cur, prv
        n -= 1
        big = np.abs(cur) > _RESCALE
        if np.any(big):
            s = np.where(big, 1 / _RESCALE, 1.0).astype(x.dtype)
            cur = cur * s
            nxt = nxt * s
            vals[n + 1:] *= s
    # cur = f_{-1}, nxt = f_0
    big = np.maximum(np.abs(nxt), np.abs(cur))
    f0, fm1 = nxt / big, cur / big
    scale = (j0 * f0 + jm1 * fm1) / (f0 * f0 + fm1 * fm1) / big
    return vals * scale


def legendre_table(lmax, t):
    """Normalized associated Legendre values and theta-derivatives.

    Returns ``(p, dp)`` each of shape ``(lmax + 1, lmax + 1) + t.shape`` with
    ``p[l, k] = N_lk P_l^k(t)`` (the L2(omega) normalization of the real
    harmonics, including the extra 1/sqrt(2) at k = 0) and ``dp[l, k]`` the
    derivative with respect to colatitude, t = cos(theta). Entries with
    k > l are zero. Requires |t| < 1 for the derivative table.
    """
    t = np.asarray(t)
    if not np.issubdtype(t.dtype, np.floating):
        t = t.astype(np.float64)
    dtype = t.dtype
    s = np.sqrt((1 - t) * (1 + t))
    p = np.zeros((lmax + 1, lmax + 1) + t.shape, dtype=dtype)
    diag = np.full_like(t, 1 / np.sqrt(4 * _pi(dtype)))
    for k in range(lmax + 1):
        if k == 1:
            diag = -diag * s * np.sqrt(dtype.type(3))
        elif k > 1:
            diag = -diag * s * np.sqrt(dtype.type(2 * k + 1) / (2 * k))
        p[k, k] = diag
        if k + 1 <= lmax:
            p[k + 1, k] = np.sqrt(dtype.type(2 * k + 3)) * t * diag
        for l in range(k + 2, lmax + 1):
            a = np.sqrt(dtype.type(4 * l * l - 1) / (l * l - k * k))
            b = np.sqrt(dtype.type((2 * l + 1) * ((l - 1) ** 2 - k * k))
                        / ((2 * l - 3) * (l * l - k * k)))
            p[l, k] = a * t * p[l - 1, k] - b * p[l - 2, k]
    dp = np.zeros_like(p)
    for l in range(lmax + 1):
        for k in range(l + 1):
            term = l * t * p[l, k]
            if l > k:
                c = np.sqrt(dtype.type((2 * l + 1) * (l - k) * (l + k)) / (2 * l - 1))
                term = term - c * p[l - 1, k]
            dp[l, k] = term / s
    return p, dp

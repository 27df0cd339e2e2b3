# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled recurrence kernels (float64 only).

Same contracts as ``_pykernels``; the dispatcher in ``_backend`` routes any
other dtype to the numpy versions.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, sqrt, fabs, M_PI

cnp.import_array()

cdef double RESCALE = 1e200


cdef void _jhalf_one(int nlo, int nhi, double x, double[:, ::1] out, Py_ssize_t col) noexcept nogil:
    cdef double pref = sqrt(2.0 / (M_PI * x))
    cdef double j0 = pref * sin(x)
    cdef double jm1 = pref * cos(x)
    cdef double up, cur, prv, nxt, nu, f0, fm1, scale, m
    cdef int n, top, start, i

    if nlo <= -1:
        up = j0
        cur = jm1
        n = -1
        while n >= nlo:
            if n <= nhi:
                out[n - nlo, col] = cur
            nu = n + 0.5
            prv = (2.0 * nu / x) * cur - up
            up = cur
            cur = prv
            n -= 1

    if nhi < 0:
        return
    top = nhi
    if x > top + 0.5:
        prv = jm1
        cur = j0
        if nlo <= 0:
            out[-nlo, col] = cur
        for n in range(0, top):
            nu = n + 0.5
            nxt = (2.0 * nu / x) * cur - prv
            prv = cur
            cur = nxt
            if n + 1 >= nlo:
                out[n + 1 - nlo, col] = cur
        return

    # Miller backward recurrence normalized against J_{1/2} and J_{-1/2}
    m = top if top > x else x
    start = <int>(m + 30 + 4 * sqrt(m))
    nxt = 0.0
    cur = 1e-30
    n = start
    while n >= 0:
        if n <= top and n >= nlo:
            out[n - nlo, col] = cur
        prv = (2.0 * (n + 0.5) / x) * cur - nxt
        nxt = cur
        cur = prv
        n -= 1
        if fabs(cur) > RESCALE:
            cur /= RESCALE
            nxt /= RESCALE
            for i in range(n + 1, top + 1):
                if i >= nlo:
                    out[i - nlo, col] /= RESCALE
    m = fabs(nxt) if fabs(nxt) > fabs(cur) else fabs(cur)
    f0 = nxt / m
    fm1 = cur / m
    scale = (j0 * f0 + jm1 * fm1) / (f0 * f0 + fm1 * fm1) / m
    for i in range(0 if nlo < 0 else nlo, top + 1):
        out[i - nlo, col] *= scale


def jhalf_range(int nlo, int nhi, x):
    shape = np.shape(x)
    xa = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[::1] xv = xa.reshape(-1)
    if nhi < nlo:
        raise ValueError("empty order range")
    cdef Py_ssize_t i, size = xv.shape[0]
    for i in range(size):
        if xv[i] <= 0:
            raise ValueError("argument must be positive")
    res = np.empty((nhi - nlo + 1, size), dtype=np.float64)
    cdef double[:, ::1] out = res
    with nogil:
        for i in range(size):
            _jhalf_one(nlo, nhi, xv[i], out, i)
    return res.reshape((nhi - nlo + 1,) + shape)


def legendre_table(int lmax, t):
    shape = np.shape(t)
    ta = np.ascontiguousarray(t, dtype=np.float64)
    cdef double[::1] tv = ta.reshape(-1)
    cdef Py_ssize_t nt = tv.shape[0]
    p_arr = np.zeros((lmax + 1, lmax + 1, nt), dtype=np.float64)
    dp_arr = np.zeros((lmax + 1, lmax + 1, nt), dtype=np.float64)
    cdef double[:, :, ::1] p = p_arr
    cdef double[:, :, ::1] dp = dp_arr
    s_arr = np.sqrt((1 - ta.reshape(-1)) * (1 + ta.reshape(-1)))
    cdef double[::1] s = s_arr
    cdef Py_ssize_t i
    cdef int l, k
    cdef double a, b, c, f
    # node loops innermost: every row p[l, k, :] is contiguous
    with nogil:
        for i in range(nt):
            p[0, 0, i] = 1.0 / sqrt(4 * M_PI)
        for k in range(lmax + 1):
            if k == 1:
                f = sqrt(3.0)
            elif k > 1:
                f = sqrt((2.0 * k + 1) / (2.0 * k))
            if k >= 1:
                for i in range(nt):
                    p[k, k, i] = -p[k - 1, k - 1, i] * s[i] * f
            if k + 1 <= lmax:
                a = sqrt(2.0 * k + 3)
                for i in range(nt):
                    p[k + 1, k, i] = a * tv[i] * p[k, k, i]
            for l in range(k + 2, lmax + 1):
                a = sqrt((4.0 * l * l - 1) / (l * l - k * k))
                b = sqrt((2.0 * l + 1) * ((l - 1.0) * (l - 1.0) - k * k)
                         / ((2.0 * l - 3) * (l * l - k * k)))
                for i in range(nt):
                    p[l, k, i] = a * tv[i] * p[l - 1, k, i] - b * p[l - 2, k, i]
        for l in range(lmax + 1):
            for k in range(l + 1):
                if l > k:
                    c = sqrt((2.0 * l + 1) * (l - k) * (l + k) / (2.0 * l - 1))
                else:
                    c = 0.0
                for i in range(nt):
                    dp[l, k, i] = (l * tv[i] * p[l, k, i] - c * p[l - 1, k, i] if l > k
                                   else l * tv[i] * p[l, k, i]) / s[i]
    return (p_arr.reshape((lmax + 1, lmax + 1) + shape),
            dp_arr.reshape((lmax + 1, lmax + 1) + shape))

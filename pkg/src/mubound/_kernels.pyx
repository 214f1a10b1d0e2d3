# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: q-series partial sums and affine point counts."""

from libc.math cimport exp, cos, sin, fmod, M_PI

import numpy as np
cimport numpy as cnp

cnp.import_array()


def qseries(const double[::1] c, Py_ssize_t M, double x, double y):
    """Return sum_{n=1}^{M} c[n-1] * exp(2*pi*i*n*(x + i*y)).

    Terms are evaluated directly and accumulated with Kahan summation, so the
    rounding error stays at a few ulps of sum |c[n] q^n| regardless of M.
    """
    cdef double sr = 0.0, si = 0.0, cr = 0.0, ci = 0.0
    cdef double mag, ph, tr, ti, t
    cdef Py_ssize_t n
    if M > c.shape[0]:
        raise ValueError("coefficient table shorter than requested length")
    for n in range(1, M + 1):
        mag = c[n - 1] * exp(-2.0 * M_PI * n * y)
        ph = 2.0 * M_PI * fmod(n * x, 1.0)
        tr = mag * cos(ph) - cr
        t = sr + tr
        cr = (t - sr) - tr
        sr = t
        ti = mag * sin(ph) - ci
        t = si + ti
        ci = (t - si) - ti
        si = t
    return complex(sr, si)


def count_affine(long a1, long a2, long a3, long a4, long a6, long p):
    """Number of affine F_p-points of the Weierstrass equation, p odd."""
    cdef long x, d, s, total = 0
    # C remainder keeps the sign of the dividend
    a1 = (a1 % p + p) % p
    a2 = (a2 % p + p) % p
    a3 = (a3 % p + p) % p
    a4 = (a4 % p + p) % p
    a6 = (a6 % p + p) % p
    cdef long b2 = (a1 * a1 + 4 * a2) % p
    cdef long b4 = (2 * a4 + a1 * a3) % p
    cdef long b6 = (a3 * a3 + 4 * a6) % p
    cdef cnp.ndarray[cnp.int8_t, ndim=1] chi = np.full(p, -1, dtype=np.int8)
    chi[0] = 0
    for x in range(1, (p - 1) // 2 + 1):
        chi[(x * x) % p] = 1
    for x in range(p):
        # (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6
        d = (((4 * x + b2) % p) * x + 2 * b4) % p
        d = (d * x + b6) % p
        total += 1 + chi[d]
    return total

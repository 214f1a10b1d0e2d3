"""Pure-Python (numpy) versions of the compiled kernels in ``_kernels.pyx``."""

import math

import numpy as np


def qseries(c, M, x, y):
    """Return sum_{n=1}^{M} c[n-1] * exp(2*pi*i*n*(x + i*y))."""
    if M > len(c):
        raise ValueError("coefficient table shorter than requested length")
    if M == 0:
        return 0j
    n = np.arange(1, M + 1, dtype=np.float64)
    # reduce the phase mod 1 before scaling so large n keeps full accuracy
    phase = np.mod(n * x, 1.0)
    terms = np.exp(-2.0 * np.pi * n * y) * np.exp(2j * np.pi * phase)
    terms *= np.asarray(c[:M], dtype=np.float64)
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


def count_affine(a1, a2, a3, a4, a6, p):
    """Number of affine F_p-points of the Weierstrass equation, p odd."""
    b2 = (a1 * a1 + 4 * a2) % p
    b4 = (2 * a4 + a1 * a3) % p
    b6 = (a3 * a3 + 4 * a6) % p
    chi = np.full(p, -1, dtype=np.int64)
    chi[0] = 0
    xs = np.arange(1, (p - 1) // 2 + 1, dtype=np.int64)
    chi[(xs * xs) % p] = 1
    x = np.arange(p, dtype=np.int64)
    d = (((4 * x + b2) % p) * x + 2 * b4) % p
    d = (d * x + b6) % p
    return int(p + chi[d].sum())

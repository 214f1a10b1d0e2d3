import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mubound import _fallback, kernels
from mubound.curve import named_curve

try:
    from mubound import _kernels
except ImportError:  # extension not built
    _kernels = None

needs_ext = pytest.mark.skipif(_kernels is None, reason="compiled kernels not built")


def naive_qseries(c, M, x, y):
    return sum(c[n - 1] * cmath.exp(2j * math.pi * n * complex(x, y)) for n in range(1, M + 1))


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")


@given(st.lists(st.floats(-3, 3), min_size=1, max_size=60),
       st.floats(-1, 1), st.floats(0.05, 2.0))
def test_fallback_qseries_matches_naive(coeffs, x, y):
    c = np.array(coeffs, dtype=float)
    got = _fallback.qseries(c, len(c), x, y)
    assert abs(got - naive_qseries(c, len(c), x, y)) < 1e-12


@needs_ext
@given(st.lists(st.floats(-3, 3), min_size=1, max_size=200),
       st.floats(-5, 5), st.floats(0.001, 1.0))
def test_backends_agree_qseries(coeffs, x, y):
    c = np.ascontiguousarray(coeffs, dtype=float)
    a = _kernels.qseries(c, len(c), x, y)
    b = _fallback.qseries(c, len(c), x, y)
    assert abs(a - b) <= 1e-12 * (1 + sum(abs(v) for v in coeffs))


@needs_ext
@given(st.lists(st.integers(-50, 50), min_size=5, max_size=5),
       st.sampled_from([3, 5, 7, 11, 13, 101, 997]))
def test_backends_agree_count_affine(ainvs, p):
    assert _kernels.count_affine(*ainvs, p) == _fallback.count_affine(*ainvs, p)


def test_count_affine_brute_force():
    E = named_curve("37a")
    for p in (3, 5, 7, 11, 13):
        brute = sum(1 for x in range(p) for y in range(p)
                    if (y * y + E.a1 * x * y + E.a3 * y - x ** 3 - E.a2 * x * x - E.a4 * x - E.a6) % p == 0)
        assert kernels.count_affine(*E.ainvs, p) == brute


def test_qseries_truncation_zero():
    assert kernels.qseries(np.zeros(3), 0, 0.1, 0.5) == 0

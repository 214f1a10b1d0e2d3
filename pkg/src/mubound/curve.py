"""Integral Weierstrass models, Hecke eigenvalues and p-adic unit arithmetic.

The conductor is trusted input. The only consistency check performed is that
every prime ``p`` not dividing ``N`` is a prime of good reduction for the
model, which is what all downstream computations rely on.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from . import kernels


class CurveError(ValueError):
    pass


class NotOrdinaryError(CurveError):
    pass


DEFAULT_M_MAX = 2_000_000


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def primes_upto(n: int) -> list:
    if n < 2:
        return []
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for q in range(2, int(n ** 0.5) + 1):
        if sieve[q]:
            sieve[q * q :: q] = False
    return [int(q) for q in np.nonzero(sieve)[0]]


def prime_factors(n: int) -> list:
    out, q = [], 2
    while q * q <= n:
        if n % q == 0:
            out.append(q)
            while n % q == 0:
                n //= q
        q += 1
    if n > 1:
        out.append(n)
    return out


def valuation(n: int, p: int) -> int:
    if n == 0:
        return math.inf
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


@dataclass(frozen=True)
class CurveModel:
    a1: int
    a2: int
    a3: int
    a4: int
    a6: int
    N: int
    label: Optional[str] = None
    b2: int = field(init=False)
    b4: int = field(init=False)
    b6: int = field(init=False)
    b8: int = field(init=False)
    c4: int = field(init=False)
    c6: int = field(init=False)
    disc: int = field(init=False)

    def __post_init__(self):
        a1, a2, a3, a4, a6 = self.ainvs
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        c4 = b2 * b2 - 24 * b4
        c6 = -b2 ** 3 + 36 * b2 * b4 - 216 * b6
        disc = -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
        for name, value in (("b2", b2), ("b4", b4), ("b6", b6), ("b8", b8),
                            ("c4", c4), ("c6", c6), ("disc", disc)):
            object.__setattr__(self, name, value)

    @property
    def ainvs(self) -> tuple:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def name(self) -> str:
        return self.label or "[{},{},{},{},{}]/N={}".format(*self.ainvs, self.N)

    def fingerprint(self) -> str:
        """Short stable hash of the coefficients and conductor."""
        key = ",".join(str(v) for v in (*self.ainvs, self.N))
        return hashlib.sha256(key.encode()).hexdigest()[:16]

    def is_good(self, p: int) -> bool:
        return self.N % p != 0

    def check_good(self, p: int) -> None:
        if self.N % p != 0 and self.disc % p == 0:
            raise CurveError(
                f"p={p} does not divide N={self.N} but divides the discriminant "
                f"{self.disc}; conductor and model are inconsistent"
            )


def validate_curve(a1, a2, a3, a4, a6, N, label=None) -> CurveModel:
    """Build a :class:`CurveModel`, rejecting singular models and bad ``N``."""
    coeffs = [a1, a2, a3, a4, a6, N]
    try:
        coeffs = [int(c) for c in coeffs]
    except (TypeError, ValueError) as exc:
        raise CurveError(f"non-integer curve data: {exc}") from None
    if coeffs[5] <= 0:
        raise CurveError(f"conductor must be positive, got {coeffs[5]}")
    curve = CurveModel(*coeffs, label=label)
    if curve.disc == 0:
        raise CurveError(f"singular model {curve.ainvs}: discriminant is 0")
    return curve


# a few standard curves, handy for the CLI and the tests
KNOWN_CURVES = {
    "11a": (0, -1, 1, -10, -20, 11),
    "11a1": (0, -1, 1, -10, -20, 11),
    "37a": (0, 0, 1, -1, 0, 37),
    "37a1": (0, 0, 1, -1, 0, 37),
    "43a": (0, 1, 1, 0, 0, 43),
    "53a": (1, -1, 1, 0, 0, 53),
    "67a": (0, 1, 1, -12, -21, 67),
}


def named_curve(label: str) -> CurveModel:
    try:
        data = KNOWN_CURVES[label]
    except KeyError:
        raise CurveError(f"unknown curve label {label!r}") from None
    return validate_curve(*data, label=label)


def _count_points_p2(curve: CurveModel) -> int:
    a1, a2, a3, a4, a6 = curve.ainvs
    count = 1
    for x in range(2):
        for y in range(2):
            if (y * y + a1 * x * y + a3 * y - x ** 3 - a2 * x * x - a4 * x - a6) % 2 == 0:
                count += 1
    return count


def count_points(curve: CurveModel, p: int) -> int:
    """Projective point count of the reduction mod a good prime ``p``."""
    if p == 2:
        return _count_points_p2(curve)
    return 1 + int(kernels.count_affine(*(c % p for c in curve.ainvs), p))


def _legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def _split_by_tangents(curve: CurveModel, p: int) -> bool:
    """Split test for a node: are the tangent lines at the singular point rational?"""
    a1, a2, a3, a4, a6 = (c % p for c in curve.ainvs)
    sing = None
    for x in range(p):
        for y in range(p):
            F = y * y + a1 * x * y + a3 * y - x ** 3 - a2 * x * x - a4 * x - a6
            Fx = a1 * y - 3 * x * x - 2 * a2 * x - a4
            Fy = 2 * y + a1 * x + a3
            if F % p == 0 and Fx % p == 0 and Fy % p == 0:
                sing = (x, y)
                break
        if sing is not None:
            break
    if sing is None:
        raise CurveError(f"no singular point found mod {p}")
    x0 = sing[0]
    # quadratic part after moving the node to the origin: Y^2 + a1 XY - (3x0 + a2) X^2
    u = (3 * x0 + a2) % p
    for X in range(p):
        for Y in range(p):
            if (X or Y) and (Y * Y + a1 * X * Y - u * X * X) % p == 0:
                return True
    return False


def bad_ap(curve: CurveModel, p: int) -> int:
    """a_p in {-1, 0, 1} for a prime dividing the conductor."""
    if curve.disc % p != 0:
        raise CurveError(f"p={p} divides N={curve.N} but not the discriminant")
    if curve.c4 % p == 0:
        return 0
    if p >= 5:
        return 1 if _legendre(-curve.c6, p) == 1 else -1
    return 1 if _split_by_tangents(curve, p) else -1


def ap(curve: CurveModel, p: int) -> int:
    """Trace of Frobenius a_p = p + 1 - #E(F_p), or the bad-prime eigenvalue."""
    if not is_prime(p):
        raise CurveError(f"{p} is not prime")
    if not curve.is_good(p):
        return bad_ap(curve, p)
    curve.check_good(p)
    value = p + 1 - count_points(curve, p)
    if value * value > 4 * p:
        raise AssertionError(f"Hasse bound violated at p={p}: a_p={value}")
    return value


class HeckeSystem:
    """Fourier coefficients a(1..M) of the newform attached to a curve.

    The table is append-only: :meth:`extended` returns a longer table sharing
    the prime data already computed.
    """

    def __init__(self, curve: CurveModel, M: int, ap_cache=None, M_max=DEFAULT_M_MAX):
        if M < 1:
            raise CurveError("table length must be at least 1")
        if M > M_max:
            raise CurveError(f"coefficient table of length {M} exceeds the cap {M_max}")
        self.curve = curve
        self.M = M
        self.M_max = M_max
        self.ap_cache: Dict[int, int] = dict(ap_cache or {})
        self.bad_ap: Dict[int, int] = {}
        for q in primes_upto(M):
            if q not in self.ap_cache:
                self.ap_cache[q] = ap(curve, q)
        for q in prime_factors(curve.N):
            self.bad_ap[q] = self.ap(q)
        self.coeffs = self._build(M)
        self.coeffs.setflags(write=False)
        self._scaled = None

    def _build(self, M: int) -> np.ndarray:
        a = np.zeros(M + 1, dtype=np.int64)
        a[1] = 1
        N = self.curve.N
        spf = np.zeros(M + 1, dtype=np.int64)
        for q in primes_upto(int(M ** 0.5) + 1):
            block = spf[q * q :: q]
            block[block == 0] = q
        for n in range(2, M + 1):
            q = int(spf[n]) or n
            m, e = n, 0
            while m % q == 0:
                m //= q
                e += 1
            if m > 1:
                a[n] = a[n // m] * a[m]
                continue
            aq = self.ap_cache[q]
            if e == 1:
                a[n] = aq
            elif N % q == 0:
                a[n] = aq * a[n // q]
            else:
                a[n] = aq * a[n // q] - q * a[n // (q * q)]
        return a

    def __getitem__(self, n: int) -> int:
        return int(self.coeffs[n])

    def ap(self, p: int) -> int:
        if p not in self.ap_cache:
            self.ap_cache[p] = ap(self.curve, p)
        return self.ap_cache[p]

    def extended(self, M: int) -> "HeckeSystem":
        if M <= self.M:
            return self
        return HeckeSystem(self.curve, M, self.ap_cache, self.M_max)

    def scaled(self) -> np.ndarray:
        """float64 array of a(n)/n for n = 1..M (index 0 is n = 1)."""
        if self._scaled is None:
            n = np.arange(1, self.M + 1, dtype=np.float64)
            self._scaled = self.coeffs[1:].astype(np.float64) / n
            self._scaled.setflags(write=False)
        return self._scaled


def an_table(curve: CurveModel, M: int, M_max: int = DEFAULT_M_MAX) -> HeckeSystem:
    return HeckeSystem(curve, M, M_max=M_max)


def is_ordinary(curve: CurveModel, p: int, a_p: Optional[int] = None) -> bool:
    if p == 2 or not is_prime(p) or not curve.is_good(p):
        return False
    curve.check_good(p)
    if a_p is None:
        a_p = ap(curve, p)
    return a_p % p != 0


def unit_root(a_p: int, p: int, k: int) -> int:
    """Unit root of x^2 - a_p x + p modulo p^k, by Newton iteration from a_p."""
    if a_p % p == 0:
        raise NotOrdinaryError(f"a_p={a_p} is divisible by p={p}: no unit root")
    if k < 1:
        raise ValueError("precision k must be positive")
    mod = p ** k
    x = a_p % mod
    prec = 1
    while prec < k:
        prec = min(2 * prec, k)
        fx = x * x - a_p * x + p
        dfx = 2 * x - a_p
        x = (x - fx * pow(dfx, -1, mod)) % mod
    assert (x * x - a_p * x + p) % mod == 0
    return x


def teichmuller(b: int, p: int, n: int) -> int:
    """Teichmüller lift of ``b`` mod p^n: the (p-1)-st root of unity congruent to b."""
    if b % p == 0:
        raise ValueError(f"{b} is not a unit mod {p}")
    mod = p ** n
    x = b % mod
    for _ in range(n - 1):
        x = pow(x, p, mod)
    return x


@dataclass(frozen=True)
class PadicContext:
    p: int
    n: int
    k: int
    a_p: int
    alpha: int
    teich: tuple
    gen: int
    dlog: Dict[int, int]

    @property
    def group_order(self) -> int:
        return self.p ** (self.n - 1)

    def class_index(self, a: int) -> int:
        """Index i with a = eta * gen^i (mod p^n) for a Teichmüller unit eta."""
        mod = self.p ** self.n
        eta = self.teich[a % self.p]
        return self.dlog[(a * pow(eta, -1, mod)) % mod]

    def coset(self, a: int) -> list:
        """The mu_{p-1}-orbit {eta * a mod p^n}, in the order of Teichmüller seeds."""
        mod = self.p ** self.n
        return [(t * a) % mod for t in self.teich[1:]]


def padic_context(curve: CurveModel, p: int, n: int, k: int, a_p: Optional[int] = None) -> PadicContext:
    if p == 2 or not is_prime(p):
        raise CurveError(f"p must be an odd prime, got {p}")
    if n < 1:
        raise CurveError("level n must be at least 1")
    if a_p is None:
        a_p = ap(curve, p)
    if not is_ordinary(curve, p, a_p):
        raise NotOrdinaryError(f"p={p} is not a good ordinary prime for {curve.name}")
    alpha = unit_root(a_p, p, k)
    mod = p ** n
    teich = (0,) + tuple(teichmuller(b, p, n) for b in range(1, p))
    gen = (1 + p) % mod
    dlog = {}
    x = 1
    for i in range(p ** (n - 1)):
        dlog[x] = i
        x = (x * gen) % mod
    return PadicContext(p, n, k, a_p, alpha, teich, gen, dlog)

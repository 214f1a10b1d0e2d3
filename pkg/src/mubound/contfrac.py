"""Continued fractions, Manin's unimodular path and P^1(Z/N) bookkeeping."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple


@dataclass(frozen=True)
class CFExpansion:
    r: Fraction
    terms: Tuple[int, ...]
    # (numerator, denominator) pairs, starting with the formal 0/1 and 1/0
    convergents: Tuple[Tuple[int, int], ...]

    @property
    def length(self) -> int:
        """Number of convergents of r itself (the formal two excluded)."""
        return len(self.terms)

    def value(self) -> Fraction:
        x = Fraction(self.terms[-1])
        for t in reversed(self.terms[:-1]):
            x = t + 1 / x
        return x


def cf_expand(r) -> CFExpansion:
    r = Fraction(r)
    num, den = r.numerator, r.denominator
    terms = []
    while True:
        q, rem = divmod(num, den)
        terms.append(q)
        if rem == 0:
            break
        num, den = den, rem
    convs = [(0, 1), (1, 0)]
    for t in terms:
        (b2, a2), (b1, a1) = convs[-2], convs[-1]
        convs.append((t * b1 + b2, t * a1 + a2))
    return CFExpansion(r, tuple(terms), tuple(convs))


def cf_length(r) -> int:
    return cf_expand(r).length


def euclid_trace(a: int, b: int) -> Tuple[int, int]:
    """gcd(a, b) and the number of division steps, for 0 <= a <= b."""
    if not (0 <= a <= b) or b < 1:
        raise ValueError(f"need 0 <= a <= b and b >= 1, got ({a}, {b})")
    steps = 0
    x, y = b, a
    while y:
        x, y = y, x % y
        steps += 1
    return x, steps


def lame_bound(den: int) -> float:
    return 1 + 2.5 * math.log(den)


def p1_normalize(c: int, d: int, N: int) -> Tuple[int, int]:
    """Canonical representative of (c : d) in P^1(Z/N).

    The representative is the lexicographically least pair among all unit
    multiples (uc, ud) mod N.
    """
    if N < 1:
        raise ValueError("N must be positive")
    if math.gcd(math.gcd(c, d), N) != 1:
        raise ValueError(f"gcd(c, d, N) > 1 for ({c}, {d}, {N})")
    c %= N
    d %= N
    best = None
    for u in range(1, N + 1):
        if math.gcd(u, N) != 1:
            continue
        pair = ((u * c) % N, (u * d) % N)
        if best is None or pair < best:
            best = pair
    return best


def p1_points(N: int) -> List[Tuple[int, int]]:
    """All points of P^1(Z/N), as canonical representatives."""
    seen = set()
    for c in range(N):
        for d in range(N):
            if math.gcd(math.gcd(c, d), N) == 1:
                seen.add(p1_normalize(c, d, N))
    if N == 1:
        seen.add((0, 0))
    return sorted(seen)


def gamma0_index(N: int) -> int:
    idx, n, q = N, N, 2
    while q * q <= n:
        if n % q == 0:
            idx = idx // q * (q + 1)
            while n % q == 0:
                n //= q
        q += 1
    if n > 1:
        idx = idx // n * (n + 1)
    return idx


@dataclass
class ManinPath:
    r: Fraction
    N: int
    matrices: List[Tuple[Tuple[int, int], Tuple[int, int]]]
    coset_histogram: Dict[Tuple[int, int], int] = field(default_factory=dict)
    audit_kappa: Optional[Fraction] = None

    @property
    def max_coset_count(self) -> int:
        return max(self.coset_histogram.values())


def _apply(g, cusp):
    """Action of an integer matrix on a cusp given as (num, den)."""
    (a, b), (c, d) = g
    x, y = cusp
    num, den = a * x + b * y, c * x + d * y
    if den == 0:
        return (1, 0)
    if den < 0:
        num, den = -num, -den
    g_ = math.gcd(num, den)
    return (num // g_, den // g_)


def manin_path(r, N: int) -> ManinPath:
    """Unimodular decomposition of the path from infinity to r.

    Leg k runs from b_{k-1}/a_{k-1} to b_k/a_k and equals g_k applied to the
    path from 0 to infinity.
    """
    cf = cf_expand(r)
    convs = cf.convergents
    mats = []
    for k in range(len(cf.terms)):
        b_k, a_k = convs[k + 2]
        b_prev, a_prev = convs[k + 1]
        s = -1 if k % 2 == 0 else 1  # (-1)^(k-1)
        mats.append(((b_k, s * b_prev), (a_k, s * a_prev)))
    hist = Counter(p1_normalize(g[1][0], g[1][1], N) for g in mats)
    return ManinPath(cf.r, N, mats, dict(sorted(hist.items())))


def check_manin_path(path: ManinPath) -> None:
    """Raise AssertionError unless determinants are 1 and the legs chain from oo to r."""
    start = (1, 0)
    for g in path.matrices:
        (a, b), (c, d) = g
        assert a * d - b * c == 1, f"det {g} != 1"
        assert _apply(g, (0, 1)) == start, f"leg {g} does not start at {start}"
        start = _apply(g, (1, 0))
    assert Fraction(*start) == path.r, f"path ends at {start}, not {path.r}"
    assert sum(path.coset_histogram.values()) == len(path.matrices)


@dataclass
class LameReport:
    count: int
    max_length: int
    min_slack: float
    worst: Optional[Fraction]


def lame_audit(sample: Iterable) -> LameReport:
    """Check l(r) <= 1 + (5/2) ln(den r) over a sample; returns the tightest case."""
    count, max_len, min_slack, worst = 0, 0, math.inf, None
    for r in sample:
        r = Fraction(r)
        length = cf_length(r)
        slack = lame_bound(r.denominator) - length
        if slack < 0:
            raise AssertionError(f"Lame bound violated at r={r}: l={length}")
        count += 1
        max_len = max(max_len, length)
        if slack < min_slack:
            min_slack, worst = slack, r
    return LameReport(count, max_len, min_slack, worst)

"""Exact arithmetic in Z[zeta_{p^n}], p-power order Dirichlet characters, Gauss sums."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Mapping, Sequence, Tuple

from .curve import is_prime

MAX_MODULUS = 100_000


class CycElement:
    """sum c_i zeta^i, reduced modulo the m-th cyclotomic polynomial (m = p^n or 1)."""

    __slots__ = ("m", "p", "coeffs")

    def __init__(self, m: int, coeffs: Sequence = (), p: int = None):
        self.m = m
        self.p = p if p is not None else _prime_of(m)
        deg = _phi(m, self.p)
        c = [Fraction(v) for v in coeffs]
        if len(c) > deg:
            c = _reduce(self._dense(c), m, self.p)
        self.coeffs = tuple(c + [Fraction(0)] * (deg - len(c)))

    def _dense(self, c):
        dense = [Fraction(0)] * self.m
        for i, v in enumerate(c):
            dense[i % self.m] += v
        return dense

    @classmethod
    def zeta_power(cls, m: int, e: int, coeff=1) -> "CycElement":
        dense = [Fraction(0)] * m
        dense[e % m] = Fraction(coeff)
        p = _prime_of(m)
        return cls(m, _reduce(dense, m, p), p)

    @classmethod
    def from_exponents(cls, m: int, terms: Mapping[int, object]) -> "CycElement":
        """Element sum_e terms[e] * zeta^e, exponents taken mod m."""
        dense = [Fraction(0)] * m
        for e, v in terms.items():
            dense[e % m] += Fraction(v)
        p = _prime_of(m)
        return cls(m, _reduce(dense, m, p), p)

    def _check(self, other):
        if not isinstance(other, CycElement):
            other = CycElement(self.m, [other], self.p)
        if other.m != self.m:
            raise ValueError(f"modulus mismatch: {self.m} vs {other.m}")
        return other

    def __add__(self, other):
        other = self._check(other)
        return CycElement(self.m, [a + b for a, b in zip(self.coeffs, other.coeffs)], self.p)

    __radd__ = __add__

    def __neg__(self):
        return CycElement(self.m, [-a for a in self.coeffs], self.p)

    def __sub__(self, other):
        return self + (-self._check(other))

    def __mul__(self, other):
        other = self._check(other)
        dense = [Fraction(0)] * self.m
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(other.coeffs):
                if b:
                    dense[(i + j) % self.m] += a * b
        return CycElement(self.m, _reduce(dense, self.m, self.p), self.p)

    __rmul__ = __mul__

    def conj(self) -> "CycElement":
        dense = [Fraction(0)] * self.m
        for i, a in enumerate(self.coeffs):
            dense[(-i) % self.m] += a
        return CycElement(self.m, _reduce(dense, self.m, self.p), self.p)

    def galois(self, u: int) -> "CycElement":
        """The automorphism zeta -> zeta^u, u prime to m."""
        if math.gcd(u, self.m) != 1:
            raise ValueError(f"{u} is not a unit mod {self.m}")
        dense = [Fraction(0)] * self.m
        for i, a in enumerate(self.coeffs):
            dense[(u * i) % self.m] += a
        return CycElement(self.m, _reduce(dense, self.m, self.p), self.p)

    def embed(self) -> complex:
        z = cmath.exp(2j * cmath.pi / self.m)
        return sum(float(a) * z ** i for i, a in enumerate(self.coeffs) if a)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, CycElement):
            try:
                other = self._check(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self.m == other.m and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.m, self.coeffs))

    def __repr__(self):
        terms = [f"{a}*z^{i}" for i, a in enumerate(self.coeffs) if a]
        return f"CycElement({self.m}: {' + '.join(terms) or '0'})"


def _prime_of(m: int):
    if m == 1:
        return None
    for p in range(2, m + 1):
        if m % p == 0:
            q = m
            while q % p == 0:
                q //= p
            if q != 1:
                raise ValueError(f"{m} is not a prime power")
            return p
    raise ValueError(m)


def _phi(m: int, p) -> int:
    return 1 if m == 1 else m // p * (p - 1)


def _reduce(dense, m, p):
    """Reduce a length-m coefficient list (exponents mod m) to degree < phi(m)."""
    if m == 1:
        return [sum(dense, Fraction(0))]
    step = m // p
    deg = _phi(m, p)
    c = list(dense)
    # zeta^(step*(p-1) + i) = -sum_{j<p-1} zeta^(step*j + i)
    for e in range(m - 1, deg - 1, -1):
        v = c[e]
        if v:
            c[e] = Fraction(0)
            base = e - deg
            for j in range(p - 1):
                c[base + j * step] -= v
    return c[:deg]


def primitive_root(p: int, n: int) -> int:
    """Least generator of (Z/p^n)^x for an odd prime p."""
    mod = p ** n
    order = mod // p * (p - 1)
    factors = {q for q in range(2, p) if (p - 1) % q == 0 and is_prime(q)}
    if n > 1:
        factors.add(p)
    for g in range(2, mod):
        if g % p == 0:
            continue
        if all(pow(g, order // q, mod) != 1 for q in factors):
            return g
    raise ValueError(f"no primitive root mod {mod}")


@dataclass(frozen=True)
class DirichletChar:
    """chi(g) = zeta_{p^(n-1)}^t for the primitive root g mod p^n; values are zeta_{p^n} powers."""

    p: int
    n: int
    t: int
    g: int
    dlog: Dict[int, int]

    @property
    def modulus(self) -> int:
        return self.p ** self.n

    def exponent(self, a: int):
        """e with chi(a) = zeta_{p^n}^e, or None when p | a."""
        if self.n == 0:
            return 0
        a %= self.modulus
        if a % self.p == 0:
            return None
        return (self.p * self.t * self.dlog[a]) % self.modulus

    def value(self, a: int) -> CycElement:
        e = self.exponent(a)
        if e is None:
            return CycElement(self.modulus)
        return CycElement.zeta_power(self.modulus, e)

    def complex_value(self, a: int) -> complex:
        e = self.exponent(a)
        return 0j if e is None else cmath.exp(2j * cmath.pi * e / self.modulus)

    @property
    def order(self) -> int:
        m = self.p ** (self.n - 1)
        return m // math.gcd(self.t, m)

    @property
    def conductor(self) -> int:
        """Least p^j such that chi is trivial on units congruent to 1 mod p^j."""
        for j in range(self.n + 1):
            q = self.p ** j
            if all(self.exponent(a) == 0 for a in range(1, self.modulus, q) if a % self.p):
                return q
        return self.modulus

    @property
    def is_primitive(self) -> bool:
        return self.conductor == self.modulus

    def conjugate(self) -> "DirichletChar":
        return self.power(-1)

    def power(self, u: int) -> "DirichletChar":
        if self.n == 0:
            return self
        return DirichletChar(self.p, self.n, (u * self.t) % (self.p ** (self.n - 1)), self.g, self.dlog)


def char_group(p: int, n: int):
    """All characters of p-power order mod p^n (there are p^(n-1) of them)."""
    if p == 2 or not is_prime(p) or n < 1:
        raise ValueError("need an odd prime p and n >= 1")
    mod = p ** n
    if mod > MAX_MODULUS:
        raise ValueError(f"p^n = {mod} exceeds {MAX_MODULUS}")
    g = primitive_root(p, n)
    dlog, x = {}, 1
    for i in range(mod // p * (p - 1)):
        dlog[x] = i
        x = (x * g) % mod
    return [DirichletChar(p, n, t, g, dlog) for t in range(p ** (n - 1))]


def trivial_character(p: int) -> DirichletChar:
    """The character of modulus 1."""
    return DirichletChar(p, 0, 0, 1, {0: 0})


def gauss_sum(chi: DirichletChar, m: int = 1) -> CycElement:
    """g(m, chi) = sum_a chi(a) zeta^(m a), exactly."""
    mod = chi.modulus
    if mod == 1:
        return CycElement(1, [1])
    terms: Dict[int, int] = {}
    for a in range(mod):
        e = chi.exponent(a)
        if e is None:
            continue
        k = (e + m * a) % mod
        terms[k] = terms.get(k, 0) + 1
    return CycElement.from_exponents(mod, terms)


def twisted_symbol_sum(chi: DirichletChar, symbol, level: int) -> CycElement:
    """sum over units a mod p^n of chi(a) [a mod p^level / p^level]."""
    mod = chi.modulus
    den = chi.p ** level
    terms: Dict[int, Fraction] = {}
    for a in range(mod):
        e = chi.exponent(a)
        if e is None:
            continue
        v = symbol(Fraction(a % den, den))
        if v:
            terms[e] = terms.get(e, Fraction(0)) + v
    return CycElement.from_exponents(mod, terms)


def char_sum_vanishing(chi: DirichletChar, symbol) -> CycElement:
    """sum_a chi(a) [a/p^(n-1)]; zero for primitive chi.  Returns the exact element."""
    if not chi.is_primitive:
        raise ValueError("the vanishing identity needs a primitive character")
    return twisted_symbol_sum(chi, symbol, chi.n - 1)


def birch_sum(chi: DirichletChar, symbol) -> CycElement:
    """sum_a chi(a) [a/p^n]."""
    return twisted_symbol_sum(chi, symbol, chi.n)


def l_value_ratio(chi: DirichletChar, symbol) -> complex:
    """Numerical estimate of L(E, conj chi, 1)/Omega via the Birch sum divided by g(chi)."""
    if not chi.is_primitive:
        raise ValueError("g(chi) vanishes for imprimitive characters of p-power modulus")
    return birch_sum(chi, symbol).embed() / gauss_sum(chi).embed()


def gauss_identity_failures(p: int, n: int) -> Tuple[int, list]:
    """g(m, chi) = conj(chi)(m) g(chi) for m < p^n and g(chi) g(conj chi) = p^n, primitive chi."""
    mod = p ** n
    count, failures = 0, []
    for chi in char_group(p, n):
        if not chi.is_primitive:
            continue
        g = gauss_sum(chi)
        bar = chi.conjugate()
        for m in range(mod):
            count += 1
            if gauss_sum(chi, m) != bar.value(m) * g:
                failures.append((chi.t, m))
        count += 1
        if g * gauss_sum(bar) != CycElement(mod, [mod]):
            failures.append((chi.t, "norm"))
    return count, failures

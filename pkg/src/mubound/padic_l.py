"""Theta elements of the cyclotomic p-adic L-function and the mu <= r criterion.

Level convention: level n uses symbols with denominator p^n and the group
G_n = (Z/p^n)^x / mu_{p-1}, cyclic of order p^(n-1) generated by the class
gamma of 1 + p.  In alpha-mode the coefficient of gamma^i is

    sum over eta in mu_{p-1} of  alpha [eta a / p^n] - [eta a / p^(n-1)],   a = (1+p)^i,

which is alpha^(n+1) times the usual normalised approximation.  Rational
symbols whose denominators contain p are handled by shifting: sums are formed
from p^e-scaled symbols modulo p^(k+e) and divided back, so only a genuinely
non-integral total is an error.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .curve import CurveError, NotOrdinaryError, is_prime, primes_upto, teichmuller, unit_root
from .periods import PeriodEngine

log = logging.getLogger(__name__)

MODES = ("alpha", "ap")


class PadicError(ArithmeticError):
    pass


class NonIntegralError(PadicError):
    """A sum that must be p-integral is not; E[p] is probably reducible."""


class PrecisionExhausted(PadicError):
    pass


class CoherenceError(AssertionError):
    """An exact p-adic identity failed: a pipeline bug, never a data condition."""


def vp(x, p: int) -> float:
    """p-adic valuation of a rational; inf for 0."""
    x = Fraction(x)
    if x == 0:
        return math.inf
    v = 0
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def residue(x, p: int, k: int) -> int:
    """x mod p^k for a p-integral rational x."""
    x = Fraction(x)
    mod = p ** k
    if x.denominator % p == 0:
        raise NonIntegralError(f"{x} is not {p}-integral")
    return x.numerator * pow(x.denominator, -1, mod) % mod


def capped_valuation(r: int, p: int, k: int) -> int:
    """Valuation of a residue mod p^k, with 0 counted as k."""
    r %= p ** k
    if r == 0:
        return k
    v = 0
    while r % p == 0:
        r //= p
        v += 1
    return v


@dataclass(frozen=True)
class ThetaElement:
    p: int
    n: int
    k: int
    coeffs: Tuple[int, ...]
    mode: str = "alpha"
    gen_power: int = 1

    def __post_init__(self):
        if len(self.coeffs) != self.p ** (self.n - 1):
            raise ValueError(f"need {self.p ** (self.n - 1)} coefficients, got {len(self.coeffs)}")

    @property
    def modulus(self) -> int:
        return self.p ** self.k

    def augmentation(self) -> int:
        return sum(self.coeffs) % self.modulus

    def reduce(self, k: int) -> "ThetaElement":
        if k > self.k:
            raise ValueError("cannot raise precision")
        mod = self.p ** k
        return ThetaElement(self.p, self.n, k, tuple(c % mod for c in self.coeffs),
                            self.mode, self.gen_power)


@dataclass(frozen=True)
class CriterionSum:
    p: int
    a: int
    n: int
    mode: str
    k: int
    residue: int
    exact_ap: Fraction  # the a_p-weighted sum as an exact rational
    p_in_denominator: bool

    @property
    def valuation(self) -> int:
        return capped_valuation(self.residue, self.p, self.k)


@dataclass(frozen=True)
class MuLambda:
    n: int
    k: int
    mu: int
    lam: int
    mu_group_ring: int


@dataclass
class KeyInequalityAudit:
    p: int
    n: int
    a: int
    a_p: int
    S: Fraction
    delta: int
    delta_S: int
    p_squared: int
    hasse_ok: bool
    p_divides_delta: bool

    @property
    def below_p_squared(self) -> bool:
        return self.delta_S != 0 and abs(self.delta_S) < self.p_squared

    @property
    def flagged(self) -> bool:
        """|delta S| >= p^2: the size argument gives nothing at this p."""
        return not self.below_p_squared


@dataclass
class CriterionReport:
    curve: str
    p: int
    r: int
    n_max: int
    k: int
    a_p: int
    alpha: int
    mode: str = "alpha"
    witness: Optional[Tuple[int, int]] = None
    valuation: Optional[int] = None
    ap_valuation: Optional[float] = None
    ap_sum: Optional[Fraction] = None
    p_in_denominator: bool = False
    levels: List[int] = field(default_factory=list)
    audit: Optional[KeyInequalityAudit] = None

    @property
    def certified(self) -> bool:
        return self.valuation is not None and self.valuation <= self.r

    @property
    def verdict(self) -> str:
        if self.certified:
            return f"mu <= {self.r} certified"
        return f"inconclusive up to n={self.n_max}"


@dataclass(frozen=True)
class InterpolationReport:
    p: int
    k: int
    lhs: int
    rhs: int
    expanded: int

    @property
    def passed(self) -> bool:
        return self.lhs == self.rhs == self.expanded


class PadicLFunction:
    """Theta elements of one curve at one good ordinary prime."""

    def __init__(self, engine: PeriodEngine, p: int):
        if p == 2 or not is_prime(p):
            raise ValueError(f"p must be an odd prime, got {p}")
        curve = engine.curve
        if curve.N % p == 0:
            raise CurveError(f"p={p} divides the conductor {curve.N}")
        curve.check_good(p)
        self.engine = engine
        self.p = p
        self.a_p = engine.hecke.ap(p)
        if self.a_p % p == 0:
            raise NotOrdinaryError(f"p={p} is supersingular for {curve.name} (a_p={self.a_p})")
        self._alpha: Dict[int, int] = {}

    # -- basic data ---------------------------------------------------------

    def alpha(self, k: int) -> int:
        if k not in self._alpha:
            self._alpha[k] = unit_root(self.a_p, self.p, k)
        return self._alpha[k]

    def symbol(self, a: int, n: int) -> Fraction:
        """[a mod p^n / p^n]; level 0 is [0]."""
        m = self.p ** n
        return self.engine.modular_symbol(Fraction(a % m, m))

    def teich(self, n: int) -> Tuple[int, ...]:
        return tuple(teichmuller(b, self.p, max(n, 1)) for b in range(1, self.p))

    def class_reps(self, n: int, gen_power: int = 1) -> List[int]:
        """(1+p)^(u i) mod p^n for i = 0 .. p^(n-1) - 1."""
        if gen_power % self.p == 0:
            raise ValueError("generator exponent must be prime to p")
        mod = self.p ** n
        g = pow(1 + self.p, gen_power, mod)
        reps, x = [], 1 % mod
        for _ in range(self.p ** (n - 1)):
            reps.append(x)
            x = x * g % mod
        return reps

    # -- p-adic combination -------------------------------------------------

    def _combine(self, terms: Sequence[Tuple[Dict[int, int], Fraction]], k: int) -> Tuple[int, bool]:
        """sum w_j x_j mod p^k where each w_j is a Laurent polynomial in alpha.

        Returns (residue, whether p divided some symbol denominator).
        """
        p = self.p
        e = max((max(0, -vp(x, p)) for _, x in terms if x), default=0)
        K = k + e
        mod = p ** K
        al = self.alpha(K)
        al_inv = pow(al, -1, mod)
        total = 0
        for w, x in terms:
            if not x:
                continue
            xs = residue(x * p ** e, p, K)
            wv = sum(c * (pow(al, j, mod) if j >= 0 else pow(al_inv, -j, mod)) for j, c in w.items())
            total += wv * xs
        total %= mod
        if e:
            if total % p ** e:
                v = capped_valuation(total, p, K) - e
                raise NonIntegralError(
                    f"sum has {p}-adic valuation {v} < 0; E[{p}] is probably reducible")
            total //= p ** e
        return total % p ** k, e > 0

    # -- criterion sums and theta -------------------------------------------

    def _class_terms(self, a: int, n: int, mode: str):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if a % self.p == 0:
            raise ValueError(f"a={a} is not prime to p={self.p}")
        w = {1: 1} if mode == "alpha" else {0: self.a_p}
        terms = []
        for eta in self.teich(n):
            b = eta * a
            terms.append((w, self.symbol(b, n)))
            terms.append(({0: -1}, self.symbol(b, n - 1)))
        return terms

    def criterion_sum(self, a: int, n: int, r: Optional[int] = None, mode: str = "alpha",
                      k: Optional[int] = None) -> CriterionSum:
        """S(a) at level n; residue mod p^k with k = r + 1 unless given."""
        if n < 1:
            raise ValueError("level n must be at least 1")
        if k is None:
            k = (r if r is not None else 0) + 1
        terms = self._class_terms(a, n, mode)
        exact = sum((Fraction(self.a_p) * x if w == {1: 1} else Fraction(w[0]) * x
                     for w, x in terms), Fraction(0))
        if mode == "ap":
            e = max(0, -vp(exact, self.p)) if exact else 0
            if e:
                raise NonIntegralError(f"S({a}) = {exact} is not {self.p}-integral")
            res = residue(exact, self.p, k)
            flagged = any(x.denominator % self.p == 0 for _, x in terms)
        else:
            res, flagged = self._combine(terms, k)
        return CriterionSum(self.p, a % self.p ** n, n, mode, k, res, exact, flagged)

    def theta(self, n: int, k: int, mode: str = "alpha", gen_power: int = 1) -> ThetaElement:
        coeffs = tuple(self.criterion_sum(a, n, mode=mode, k=k).residue
                       for a in self.class_reps(n, gen_power))
        return ThetaElement(self.p, n, k, coeffs, mode, gen_power)

    def project(self, theta: ThetaElement) -> ThetaElement:
        """Norm from level n+1 to level n, divided by alpha."""
        if theta.mode != "alpha":
            raise ValueError("projection is only defined for alpha-mode elements")
        if theta.n < 2:
            raise ValueError("nothing below level 1")
        n, mod = theta.n - 1, theta.modulus
        size = self.p ** (n - 1)
        sums = [0] * size
        for i, c in enumerate(theta.coeffs):
            sums[i % size] += c
        inv = pow(self.alpha(theta.k), -1, mod)
        return ThetaElement(self.p, n, theta.k, tuple(s * inv % mod for s in sums),
                            "alpha", theta.gen_power)

    def check_norm_coherence(self, n: int, k: int) -> ThetaElement:
        low = self.theta(n, k)
        projected = self.project(self.theta(n + 1, k))
        if projected.coeffs != low.coeffs:
            raise CoherenceError(
                f"p={self.p} n={n} k={k}: project(theta_{n + 1}) = {projected.coeffs} "
                f"but theta_{n} = {low.coeffs}")
        return low

    def interpolation_check_trivial(self, k: int) -> InterpolationReport:
        """augmentation(theta_1) alpha^-2 against (1 - 1/alpha)^2 [0], both mod p^k."""
        zero = self.symbol(0, 0)
        lhs, _ = self._combine([({-1: 1}, x) if w == {1: 1} else ({-2: w[0]}, x)
                                for w, x in self._class_terms(1, 1, "alpha")], k)
        rhs, _ = self._combine([({0: 1, -1: -2, -2: 1}, zero)], k)
        # after the Hecke identity: alpha^-1 (a_p - 2)[0] - alpha^-2 (p - 1)[0]
        expanded, _ = self._combine([({-1: self.a_p - 2, -2: -(self.p - 1)}, zero)], k)
        report = InterpolationReport(self.p, k, lhs, rhs, expanded)
        if not report.passed:
            raise CoherenceError(f"interpolation at p={self.p}, k={k}: "
                                 f"lhs={lhs} rhs={rhs} expanded={expanded}")
        return report

    # -- estimates and the witness search -----------------------------------

    def delta(self) -> int:
        """A positive integer clearing every symbol denominator.

        Uses the lcm of the unimodular coset values when available, which
        bounds all symbols; otherwise the running lcm of computed symbols.
        """
        cosets = self.engine.coset_values()
        if cosets:
            d = 1
            for v in cosets.values():
                d = d * v.denominator // math.gcd(d, v.denominator)
            return d
        return self.engine.symbols.delta

    def key_inequality_audit(self, n: int, a: int) -> KeyInequalityAudit:
        S = self.criterion_sum(a, n, mode="ap").exact_ap
        d = self.delta()
        dS = d * S
        if dS.denominator != 1:
            raise CoherenceError(f"delta*S = {dS} is not an integer (delta={d})")
        return KeyInequalityAudit(
            self.p, n, a % self.p ** n, self.a_p, S, d, int(dS), self.p ** 2,
            self.a_p * self.a_p <= 4 * self.p, d % self.p == 0)

    def mu_witness_search(self, r: int, n_max: int, k: Optional[int] = None) -> CriterionReport:
        """First (n, a) with alpha-mode S(a) nonzero mod p^(r+1)."""
        if r < 0 or n_max < 1:
            raise ValueError("need r >= 0 and n_max >= 1")
        k = r + 1 if k is None else max(k, r + 1)
        report = CriterionReport(self.engine.curve.name, self.p, r, n_max, k,
                                 self.a_p, self.alpha(k))
        start = 2 if self.symbol(0, 0) == 0 else 1
        for n in range(start, n_max + 1):
            report.levels.append(n)
            for a in range(1, self.p ** n, self.p):
                s = self.criterion_sum(a, n, mode="alpha", k=k)
                report.p_in_denominator |= s.p_in_denominator
                v = s.valuation
                if v <= r:
                    report.witness = (n, a)
                    report.valuation = v
                    report.ap_sum = s.exact_ap
                    report.ap_valuation = vp(s.exact_ap, self.p)
                    report.audit = self.key_inequality_audit(n, a)
                    return report
        report.valuation = r + 1
        return report

    def mu_lambda_levels(self, levels: Iterable[int], k: int):
        """Estimates at each level, plus the value shared by two consecutive levels, if any."""
        out, stable, prev = [], None, None
        for n in levels:
            est = mu_lambda_estimate(self.theta(n, k))
            out.append(est)
            if prev is not None and (prev.mu, prev.lam) == (est.mu, est.lam) and stable is None:
                stable = (est.mu, est.lam)
            prev = est
        return out, stable


def to_power_series(theta: ThetaElement) -> Tuple[int, ...]:
    """Coefficients of T^j in sum_i d_i (1+T)^i mod p^k."""
    mod = theta.modulus
    size = len(theta.coeffs)
    return tuple(sum(d * math.comb(i, j) for i, d in enumerate(theta.coeffs) if i >= j) % mod
                 for j in range(size))


def from_power_series(series: Sequence[int], p: int, n: int, k: int,
                      mode: str = "alpha", gen_power: int = 1) -> ThetaElement:
    """Inverse of to_power_series: T^j = sum_i C(j, i) (-1)^(j-i) (1+T)^i."""
    mod = p ** k
    size = len(series)
    coeffs = tuple(sum(e * math.comb(j, i) * (-1) ** (j - i)
                       for j, e in enumerate(series) if j >= i) % mod
                   for i in range(size))
    return ThetaElement(p, n, k, coeffs, mode, gen_power)


def mu_lambda_estimate(theta: ThetaElement) -> MuLambda:
    p, k = theta.p, theta.k
    series = to_power_series(theta)
    vals = [capped_valuation(c, p, k) for c in series]
    mu = min(vals)
    if mu >= k:
        raise PrecisionExhausted(f"all coefficients vanish mod {p}^{k} at level {theta.n}")
    mu_gr = min(capped_valuation(c, p, k) for c in theta.coeffs)
    return MuLambda(theta.n, k, mu, vals.index(mu), mu_gr)


@dataclass
class ScanRow:
    p: int
    a_p: int
    ordinary: bool
    witness: Optional[Tuple[int, int]]
    valuation: Optional[int]
    verdict: str
    delta_S: Optional[int] = None
    below_p_squared: Optional[bool] = None
    reducible_hint: bool = False
    error: str = ""

    FIELDS = ("p", "a_p", "ordinary", "witness_n", "witness_a", "v_p", "verdict",
              "delta_S", "below_p2", "reducible_hint", "error")

    def as_row(self) -> Tuple:
        n, a = self.witness if self.witness else ("", "")
        return (self.p, self.a_p, int(self.ordinary), n, a,
                "" if self.valuation is None else self.valuation, self.verdict,
                "" if self.delta_S is None else self.delta_S,
                "" if self.below_p_squared is None else int(self.below_p_squared),
                int(self.reducible_hint), self.error)


def scan_primes(engine: PeriodEngine, p_max: int, r: int = 1, n_max: int = 2,
                p_min: int = 3) -> List[ScanRow]:
    """One row per odd good ordinary p in [p_min, p_max], in increasing order."""
    rows = []
    for p in primes_upto(p_max):
        if p < max(p_min, 3) or engine.curve.N % p == 0:
            continue
        a_p = engine.hecke.ap(p)
        if a_p % p == 0:
            continue
        try:
            rep = PadicLFunction(engine, p).mu_witness_search(r, n_max)
            audit = rep.audit
            if audit is None:
                # no witness: audit the first searched class instead
                audit = PadicLFunction(engine, p).key_inequality_audit(rep.levels[0] if rep.levels else 1, 1)
            rows.append(ScanRow(p, a_p, True, rep.witness, rep.valuation, rep.verdict,
                                audit.delta_S, audit.below_p_squared, rep.p_in_denominator))
        except CoherenceError:
            raise
        except Exception as exc:  # recorded in-row; the scan continues
            log.warning("p=%d: %s", p, exc)
            rows.append(ScanRow(p, a_p, True, None, None, "error", error=f"{type(exc).__name__}: {exc}"))
    return rows

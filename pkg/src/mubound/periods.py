"""Period integrals of the newform and exact modular symbols.

All integrals are reduced to values of

    Phi(tau) = sum_{n >= 1} a(n)/n * exp(2 pi i n tau),

which satisfies 2 pi i * int_tau^{i oo} f(z) dz = -Phi(tau).  Cusps with
denominator divisible by N are handled through Gamma_0(N)-invariance, all
others through the Fricke involution.  Modular symbols are the real parts of
these integrals divided by the Néron period, recovered exactly as rationals.
"""

from __future__ import annotations

import logging
import math
from fractions import Fraction
from typing import Dict, Iterable, Optional, Tuple

import mpmath
from mpmath.libmp import to_rational
import numpy as np

from . import kernels
from .contfrac import manin_path, p1_normalize
from .curve import CurveModel, HeckeSystem, an_table

log = logging.getLogger(__name__)

SQRT3 = math.sqrt(3.0)
EPS = 2.0 ** -52
# double-precision kernels are trusted while the rounding estimate is this far below tol
ROUNDING_MARGIN = 10.0
COSET_TOL = 1e-13


class PeriodError(RuntimeError):
    pass


class ReconstructionError(PeriodError):
    pass


class UnsupportedDenominator(PeriodError, ValueError):
    pass


def truncation_length(y: float, tol: float, weight: int = 0) -> int:
    """Least M with sqrt(3) * sum_{n > M} n^weight x^n <= tol, x = exp(-2 pi y).

    ``weight=0`` bounds the Phi tail using |a(n)|/n <= sqrt(3); ``weight=1``
    bounds the tail of f itself using |a(n)| <= sqrt(3) n.
    """
    if y <= 0:
        raise ValueError("Im(tau) must be positive")
    if tol <= 0:
        raise ValueError("tol must be positive")
    logx = -2.0 * math.pi * y
    x = math.exp(logx)
    one_minus_x = -math.expm1(logx)
    if weight == 0:
        # sqrt(3) x^(M+1) / (1 - x) <= tol
        M = math.ceil((math.log(tol * one_minus_x / SQRT3)) / logx - 1.0)
        M = max(M, 0)
        while SQRT3 * math.exp(logx * (M + 1)) / one_minus_x > tol:
            M += 1
        return M
    M = 1
    # sum_{n>M} n x^n <= (M+1) x^(M+1) / (1-x)^2 for x <= 1/2
    while SQRT3 * (M + 1) * math.exp(logx * (M + 1)) / one_minus_x ** 2 > tol:
        M = max(M + 1, int(M * 1.25))
    return M


def rational_reconstruct(x, Qmax: int, err) -> Fraction:
    """The unique p/q with q <= Qmax and |x - p/q| <= err.

    Requires 2 * err * Qmax^2 < 1; the answer is then a convergent of x.
    """
    if err < 0 or Qmax < 1:
        raise ValueError("need err >= 0 and Qmax >= 1")
    if 2 * err * Qmax * Qmax >= 1:
        raise ReconstructionError(
            f"error bound {float(err):.3g} too large for Qmax={Qmax} (need 2*err*Qmax^2 < 1)"
        )
    xf = _to_fraction(x)
    err = _to_fraction(err)
    h0, h1 = 0, 1
    k0, k1 = 1, 0
    num, den = xf.numerator, xf.denominator
    while den:
        a, rem = divmod(num, den)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        if k1 > Qmax:
            break
        if abs(xf - Fraction(h1, k1)) <= err:
            return Fraction(h1, k1)
        num, den = den, rem
    raise ReconstructionError(
        f"no fraction with denominator <= {Qmax} within {float(err):.3g} of {float(xf)!r}"
    )


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, mpmath.mpf):
        # man_exp drops the sign; go through the signed rational form
        num, den = to_rational(x._mpf_)
        return Fraction(int(num), int(den))
    return Fraction(float(x))


def _frac_mod1(q: Fraction) -> Fraction:
    return q - (q.numerator // q.denominator)


class ModularSymbolTable:
    """Exact symbols [a/m] keyed by canonical (a, m), with the running lcm of denominators."""

    def __init__(self):
        self.entries: Dict[Tuple[int, int], Fraction] = {}
        self.delta = 1

    @staticmethod
    def key(r) -> Tuple[int, int]:
        r = Fraction(r)
        m = r.denominator
        a = r.numerator % m
        return (min(a, m - a) if m > 1 else 0, m)

    def __contains__(self, r) -> bool:
        return self.key(r) in self.entries

    def __getitem__(self, r) -> Fraction:
        return self.entries[self.key(r)]

    def __len__(self) -> int:
        return len(self.entries)

    def insert(self, r, value: Fraction) -> None:
        k = self.key(r)
        old = self.entries.get(k)
        if old is not None and old != value:
            raise AssertionError(f"conflicting values for [{k[0]}/{k[1]}]: {old} vs {value}")
        self.entries[k] = value
        self.delta = self.delta * value.denominator // math.gcd(self.delta, value.denominator)

    def merge(self, other: "ModularSymbolTable") -> None:
        for (a, m), v in sorted(other.entries.items()):
            self.insert(Fraction(a, m), v)

    def lines(self) -> list:
        return [f"{a}/{m} = {v.numerator}/{v.denominator}"
                for (a, m), v in sorted(self.entries.items(), key=lambda kv: (kv[0][1], kv[0][0]))]

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "ModularSymbolTable":
        table = cls()
        for line in lines:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            lhs, rhs = (s.strip() for s in line.split("="))
            a, m = (int(t) for t in lhs.split("/"))
            table.insert(Fraction(a, m), Fraction(rhs))
        return table


class PeriodEngine:
    """Numerical period integrals of a curve, and its exact modular symbols.

    ``tol`` is the absolute error target for a single Phi evaluation.  Symbols
    are reconstructed with denominators up to ``Qmax`` and cached in
    ``self.symbols``.
    """

    def __init__(self, curve: CurveModel, tol: float = 1e-9, Qmax: int = 10_000,
                 hecke: Optional[HeckeSystem] = None, seed: int = 0,
                 retries: int = 2, table: Optional[ModularSymbolTable] = None,
                 method: str = "auto", direct_height_limit: int = 20_000):
        if method not in ("auto", "direct", "manin"):
            raise ValueError(f"unknown symbol method {method!r}")
        self.curve = curve
        self.method = method
        self.direct_height_limit = direct_height_limit
        self._cosets: Optional[Dict[Tuple[int, int], Fraction]] = None
        self.N = curve.N
        self.tol = tol
        self.Qmax = Qmax
        self.seed = seed
        self.retries = retries
        self.hecke = hecke or an_table(curve, 64)
        self.symbols = table if table is not None else ModularSymbolTable()
        self._mp_coeffs: Dict[int, list] = {}
        self.omega_mp = real_period(curve, dps=50)
        self.omega = float(self.omega_mp)
        self.epsilon = self.fricke_sign()

    # -- coefficient tables ---------------------------------------------

    def _ensure(self, M: int) -> None:
        if M > self.hecke.M:
            self.hecke = self.hecke.extended(max(M, int(self.hecke.M * 1.5)))
            self._mp_coeffs.clear()

    def _mp_table(self, M: int, dps: int) -> list:
        self._ensure(M)
        tab = self._mp_coeffs.get(dps)
        if tab is None or len(tab) < M:
            with mpmath.workdps(dps):
                tab = [mpmath.mpf(int(self.hecke.coeffs[n])) / n
                       for n in range(1, self.hecke.M + 1)]
            self._mp_coeffs[dps] = tab
        return tab

    # -- Phi -----------------------------------------------------------

    def phi_series(self, tau, tol: Optional[float] = None):
        """Phi(tau) to absolute error ``tol``.

        ``tau`` is a complex number or a pair (x, y) whose entries may be
        Fractions; exact real parts are reduced mod 1 before evaluation.
        Returns a Python complex in double precision mode, an mpc otherwise.
        """
        tol = self.tol if tol is None else tol
        if isinstance(tau, tuple):
            x, y = tau
        else:
            x, y = tau.real, tau.imag
        if isinstance(x, Fraction):
            x = _frac_mod1(x)
        else:
            x = x - math.floor(x)
        y_f = float(y)
        if y_f <= 0:
            raise ValueError("Im(tau) must be positive")
        M = truncation_length(y_f, tol / 2)
        x1 = math.exp(-2 * math.pi * y_f)
        bound = SQRT3 * x1 / -math.expm1(-2 * math.pi * y_f)
        if 8 * EPS * bound * ROUNDING_MARGIN <= tol / 2:
            self._ensure(M)
            return kernels.qseries(self.hecke.scaled(), M, float(x), y_f)
        return self._phi_mp(x, y, M, tol)

    def _phi_mp(self, x, y, M, tol):
        dps = int(-math.log10(tol)) + int(math.log10(M + 10)) + 12
        coeffs = self._mp_table(M, dps)
        with mpmath.workdps(dps):
            xm = mpmath.mpf(x.numerator) / x.denominator if isinstance(x, Fraction) else mpmath.mpf(x)
            ym = mpmath.mpf(y.numerator) / y.denominator if isinstance(y, Fraction) else mpmath.mpf(y)
            q = mpmath.exp(2j * mpmath.pi * mpmath.mpc(xm, ym))
            s = mpmath.mpc(0)
            for n in range(M, 0, -1):
                s = (s + coeffs[n - 1]) * q
            return s

    def f_series(self, z: complex, tol: float = 1e-13) -> complex:
        """The newform itself, f(z) = sum a(n) q^n, in double precision."""
        M = truncation_length(z.imag, tol, weight=1)
        self._ensure(M)
        c = self.hecke.coeffs[1 : M + 1].astype(np.float64)
        return kernels.qseries(np.ascontiguousarray(c), M, z.real - math.floor(z.real), z.imag)

    # -- Fricke sign and period ------------------------------------------

    def fricke_sign(self, z: Optional[complex] = None, tol: float = 1e-10) -> int:
        """The sign eps with f(-1/(Nz)) = eps N z^2 f(z).

        Tested at an off-axis point: at i/sqrt(N) the identity is degenerate.
        On an ambiguous margin a seeded jittered point is tried before giving up.
        """
        rng = np.random.default_rng(self.seed)
        points = [z or complex(0.01, 1.06 / math.sqrt(self.N))]
        points += [complex(rng.uniform(0.02, 0.2), rng.uniform(0.9, 1.3) / math.sqrt(self.N))
                   for _ in range(3)]
        for pt in points:
            w = -1.0 / (self.N * pt)
            lhs = self.f_series(w)
            rhs = self.N * pt * pt * self.f_series(pt)
            plus, minus = abs(lhs - rhs), abs(lhs + rhs)
            good, bad = min(plus, minus), max(plus, minus)
            if good <= tol and bad >= 100 * tol:
                return 1 if plus < minus else -1
            log.warning("ambiguous Fricke margin at z=%s (%.3g vs %.3g)", pt, good, bad)
        raise PeriodError("could not determine the Fricke sign; try another test point")

    # -- integrals -------------------------------------------------------

    def lambda0(self, tol: Optional[float] = None):
        """2 pi i * int_0^{i oo} f(z) dz = (eps - 1) Phi(i/sqrt N)."""
        tol = self.tol if tol is None else tol
        if self.epsilon == 1:
            return 0j
        if tol < 1e-12:
            with mpmath.workdps(int(-math.log10(tol)) + 15):
                y = 1 / mpmath.sqrt(self.N)
                M = truncation_length(float(y), tol / 2)
                return (self.epsilon - 1) * self._phi_mp(Fraction(0), y, M, tol)
        return (self.epsilon - 1) * self.phi_series((0.0, 1.0 / math.sqrt(self.N)), tol)

    def lambda_cusp(self, A: int, C: int, tol: Optional[float] = None, D: Optional[int] = None):
        """2 pi i * int_{A/C}^{i oo} f(z) dz for a cusp with N | C.

        Uses gamma = [[A, B], [C, D]] in Gamma_0(N): the integral equals
        Phi((-D + i)/C) - Phi((A + i)/C).
        """
        if C <= 0 or C % self.N != 0 or math.gcd(A, C) != 1:
            raise ValueError(f"need C > 0, N | C and gcd(A, C) = 1; got A={A}, C={C}")
        tol = self.tol if tol is None else tol
        if D is None:
            D = pow(A, -1, C)
        elif (A * D - 1) % C != 0:
            raise ValueError(f"D={D} is not an inverse of A={A} mod C={C}")
        y = Fraction(1, C)
        return self.phi_series((Fraction(-D, C), y), tol) - self.phi_series((Fraction(A, C), y), tol)

    def lambda_rational(self, r, tol: Optional[float] = None):
        """2 pi i * int_r^{i oo} f(z) dz for r with denominator prime to N."""
        r = Fraction(r)
        m = r.denominator
        if math.gcd(m, self.N) != 1:
            raise UnsupportedDenominator(f"denominator {m} of {r} is not prime to N={self.N}")
        tol = self.tol if tol is None else tol
        a = r.numerator % m
        if m == 1:
            return self.lambda0(tol)
        if 2 * a > m:
            a -= m
        # r ~ a/m maps under the Fricke involution to the cusp -m/(N a)
        A, C = -m, self.N * a
        if C < 0:
            A, C = -A, -C
        g = math.gcd(A, C)
        A, C = A // g, C // g
        return self.epsilon * (self.lambda_cusp(A, C, tol) - self.lambda0(tol))

    def period(self, gamma, tol: Optional[float] = None):
        """2 pi i * int_z^{gamma z} f(z) dz for gamma in Gamma_0(N) (independent of z)."""
        (a, b), (c, d) = gamma
        if a * d - b * c != 1 or c % self.N != 0 or c <= 0:
            raise ValueError(f"{gamma} is not in Gamma_0({self.N}) with c > 0")
        tol = self.tol if tol is None else tol
        y = Fraction(1, c)
        return self.phi_series((Fraction(a, c), y), tol) - self.phi_series((Fraction(-d, c), y), tol)

    # -- symbols -----------------------------------------------------------

    def symbol_error(self, tol: float) -> float:
        return (4 * tol + 64 * EPS) / self.omega

    def approx_symbol(self, r, tol: Optional[float] = None):
        """-Re(lambda(r)) / Omega as a float or mpf."""
        tol = self.tol if tol is None else tol
        lam = self.lambda_rational(r, tol)
        if isinstance(lam, mpmath.mpc):
            with mpmath.workdps(int(-math.log10(tol)) + 15):
                return -lam.real / self.omega_mp
        return -lam.real / self.omega

    def compute_symbol(self, r, tol: Optional[float] = None) -> Fraction:
        """Reconstruct [r] from scratch (no cache), escalating precision on failure."""
        tol = self.tol if tol is None else tol
        last = None
        for _ in range(self.retries + 1):
            x = self.approx_symbol(r, tol)
            try:
                return rational_reconstruct(x, self.Qmax, self.symbol_error(tol))
            except ReconstructionError as exc:
                last = exc
                log.info("reconstruction of [%s] failed at tol=%g; escalating", r, tol)
                tol = tol * tol
        raise ReconstructionError(f"[{r}] on {self.curve.name}: {last}")

    def modular_symbol(self, r) -> Fraction:
        r = Fraction(r)
        if r in self.symbols:
            return self.symbols[r]
        if math.gcd(r.denominator, self.N) != 1:
            raise UnsupportedDenominator(
                f"denominator {r.denominator} of {r} is not prime to N={self.N}")
        if self._use_manin(r):
            value = self.manin_symbol(r)
        else:
            value = self.compute_symbol(r)
        self.symbols.insert(r, value)
        return value

    def _use_manin(self, r: Fraction) -> bool:
        if self.method != "auto":
            return self.method == "manin"
        m = r.denominator
        a = r.numerator % m
        height = self.N * min(a, m - a)
        return height > self.direct_height_limit and self.coset_values() is not None

    # -- unimodular (Manin) route -------------------------------------------

    def coset_values(self) -> Optional[Dict[Tuple[int, int], Fraction]]:
        """Exact Re(2 pi i int_{g(0)}^{g(oo)} f dz) / Omega for every point of P^1(Z/N).

        None when some coset has no representative whose two cusps are
        reachable (denominator prime to N or divisible by N).
        """
        if self._cosets is None:
            self._cosets = self._build_cosets()
        return self._cosets or None

    def _cusp_lambda(self, num: int, den: int, tol: float):
        """2 pi i * int_{num/den}^{i oo} f dz, or None if the cusp is not reachable."""
        if den == 0:
            return 0j
        if den < 0:
            num, den = -num, -den
        g = math.gcd(den, self.N)
        if g == 1:
            return self.lambda_rational(Fraction(num, den), tol)
        if g == self.N:
            return self.lambda_cusp(num, den, tol)
        return None

    def _build_cosets(self) -> Dict[Tuple[int, int], Fraction]:
        from .contfrac import p1_points

        # coset heights are at most ~N, so a tight tolerance is cheap
        tol = min(self.tol, COSET_TOL)
        values = {}
        for c, d in p1_points(self.N):
            rep = self._coset_rep(c, d)
            if rep is None:
                log.info("coset (%d:%d) mod %d has no reachable representative", c, d, self.N)
                return {}
            (a, b), (c1, d1) = rep
            start, end = self._cusp_lambda(b, d1, tol), self._cusp_lambda(a, c1, tol)
            # 2 pi i int_{g0}^{g oo} = lambda(g0) - lambda(g oo)
            x = complex(start - end).real / self.omega
            try:
                values[(c, d)] = rational_reconstruct(x, self.Qmax, 2 * self.symbol_error(tol))
            except ReconstructionError:
                log.info("coset (%d:%d): value %r not reconstructible", c, d, x)
                return {}
        return values

    def _coset_rep(self, c: int, d: int):
        """A small matrix in SL_2(Z) with bottom row (c : d) mod N and reachable cusps."""
        N = self.N

        def ok(v):
            return v == 0 or math.gcd(v, N) in (1, N)

        for k in range(N * 4 + 4):
            for c1 in (c + k * N, c - k * N) if k else (c,):
                for j in range(N * 4 + 4):
                    for d1 in (d + j * N, d - j * N) if j else (d,):
                        if math.gcd(c1, d1) != 1 or not (ok(c1) and ok(d1)):
                            continue
                        if p1_normalize(c1, d1, N) != (c, d):
                            continue
                        # a d1 - b c1 = 1
                        if c1 == 0:
                            a, b = d1, 0
                        else:
                            a = pow(d1, -1, abs(c1)) if abs(c1) > 1 else 0
                            b = (a * d1 - 1) // c1
                        assert a * d1 - b * c1 == 1
                        return ((a, b), (c1, d1))
        return None

    def manin_symbol(self, r) -> Fraction:
        """[r] as the exact sum of coset values along the unimodular path to r."""
        cosets = self.coset_values()
        if cosets is None:
            raise UnsupportedDenominator(f"unimodular route unavailable for N={self.N}")
        path = manin_path(Fraction(r), self.N)
        # [r] = -Re(lambda(r))/Omega and lambda(r) = -sum over legs
        return sum((cosets[u] * k for u, k in path.coset_histogram.items()), Fraction(0))

    def symbols_for_denominator(self, m: int) -> Dict[int, Fraction]:
        """[a/m] for all 0 <= a < m with gcd(a, m) = 1 (a = 0 only when m = 1)."""
        if math.gcd(m, self.N) != 1:
            raise UnsupportedDenominator(f"denominator {m} is not prime to N={self.N}")
        # size the table once for the smallest height in the batch
        if m > 1:
            self._ensure(truncation_length(1.0 / (self.N * (m // 2)), self.tol / 2))
        out = {}
        for a in range(m):
            if math.gcd(a, m) == 1:
                out[a] = self.modular_symbol(Fraction(a, m))
        return out


def real_period(curve: CurveModel, dps: int = 40):
    """Néron period: integral of the invariant differential over E(R).

    AGM formulas for both signs of the discriminant; Omega carries the factor 2
    when E(R) has two components.
    """
    with mpmath.workdps(dps + 10):
        e1, e2, e3, two_components = _real_roots(curve)
        if two_components:
            omega0 = mpmath.pi / mpmath.agm(mpmath.sqrt(e1 - e3), mpmath.sqrt(e1 - e2))
            omega = 2 * omega0
        else:
            beta = abs(e1 - e2)
            omega = 2 * mpmath.pi / mpmath.agm(
                2 * mpmath.sqrt(beta), mpmath.sqrt(2 * beta + 3 * e1 + mpmath.mpf(curve.b2) / 4))
        if not omega > 0:
            raise PeriodError("non-positive real period")
    with mpmath.workdps(dps):
        return +omega


def real_period_quadrature(curve: CurveModel, dps: int = 30):
    """Independent check of :func:`real_period`: 2 * int_{e1}^oo dx / y by quadrature."""
    with mpmath.workdps(dps + 10):
        e1, e2, e3, two_components = _real_roots(curve)

        def integrand(t):
            x = e1 + t * t
            return 1 / mpmath.sqrt(mpmath.re((x - e2) * (x - e3)))

        half = mpmath.quad(integrand, [0, 1, 10, mpmath.inf])
        omega = 4 * half if two_components else 2 * half
    with mpmath.workdps(dps):
        return +omega


def _real_roots(curve: CurveModel):
    """Roots of 4x^3 + b2 x^2 + 2 b4 x + b6, largest real root first."""
    roots = mpmath.polyroots([4, curve.b2, 2 * curve.b4, curve.b6], maxsteps=500, extraprec=200)
    scale = max(abs(r) for r in roots) + 1
    tiny = mpmath.mpf(10) ** (-(mpmath.mp.dps // 2)) * scale
    if curve.disc > 0:
        reals = sorted((mpmath.re(r) for r in roots), reverse=True)
        if any(abs(mpmath.im(r)) > tiny for r in roots):
            raise PeriodError("expected three real roots")
        return reals[0], reals[1], reals[2], True
    real = [r for r in roots if abs(mpmath.im(r)) <= tiny]
    cplx = [r for r in roots if abs(mpmath.im(r)) > tiny]
    if len(real) != 1 or len(cplx) != 2:
        raise PeriodError("expected one real root")
    return mpmath.re(real[0]), cplx[0], cplx[1], False


def growth_audit(table: ModularSymbolTable) -> Fraction:
    """max |[r]| / (1 + ln den r) over the table, as a float."""
    best = 0.0
    for (a, m), v in table.entries.items():
        best = max(best, abs(float(v)) / (1 + math.log(m)))
    return best


def hecke_identity_failures(engine: PeriodEngine, p: int, n_max: int = 1) -> Tuple[int, list]:
    """Check a_p [a/p^n] = [p a / p^n] + sum_j [(a + j p^n)/p^(n+1)] for all a mod p^n, n <= n_max.

    Returns (number of instances checked, list of failing (n, a, lhs, rhs)).
    """
    if engine.N % p == 0:
        raise ValueError(f"p={p} divides the conductor")
    a_p = engine.hecke.ap(p)
    count, failures = 0, []
    for n in range(n_max + 1):
        m = p ** n
        for a in range(m):
            lhs = a_p * engine.modular_symbol(Fraction(a, m))
            rhs = engine.modular_symbol(Fraction(p * a % m, m))
            rhs += sum(engine.modular_symbol(Fraction(a + j * m, m * p)) for j in range(p))
            count += 1
            if lhs != rhs:
                failures.append((n, a, lhs, rhs))
    return count, failures

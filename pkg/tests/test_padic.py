import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from mubound.curve import CurveError, NotOrdinaryError
from mubound.padic_l import (CoherenceError, NonIntegralError, PadicLFunction, PrecisionExhausted,
                             ThetaElement, capped_valuation, from_power_series, mu_lambda_estimate,
                             residue, scan_primes, to_power_series, vp)

CASES = [("11a", 5), ("11a", 7), ("37a", 5), ("37a", 7), ("11a", 3), ("37a", 11)]  # a_3(37a) = -3


@pytest.fixture(scope="module")
def L(engines):
    cache = {}

    def get(label, p):
        if (label, p) not in cache:
            cache[label, p] = PadicLFunction(engines[label], p)
        return cache[label, p]
    return get


@pytest.mark.parametrize("label,p", CASES)
@pytest.mark.parametrize("n", [1, 2])
def test_norm_coherence(L, label, p, n):
    for k in (1, 2, 4):
        if p ** (n + 1) <= 400:
            L(label, p).check_norm_coherence(n, k)


def test_project_requires_alpha_mode(L):
    th = L("11a", 7).theta(2, 2, mode="ap")
    with pytest.raises(ValueError):
        L("11a", 7).project(th)


@pytest.mark.parametrize("label,p", [c for c in CASES if c != ("11a", 5)])
def test_mode_congruence(L, label, p):
    lf = L(label, p)
    for n in (1, 2):
        a = lf.theta(n, 3, "alpha").coeffs
        b = lf.theta(n, 3, "ap").coeffs
        assert all((x - y) % p == 0 for x, y in zip(a, b))


def test_modes_differ_when_p_divides_denominators(L):
    # 11a at 5: (alpha - a_p) * sum has a 5 in the denominator, so the modes part ways
    lf = L("11a", 5)
    alpha_mode = lf.criterion_sum(1, 1, k=2)
    ap_mode = lf.criterion_sum(1, 1, mode="ap", k=2)
    assert alpha_mode.p_in_denominator
    assert alpha_mode.residue % 5 == 0 and ap_mode.residue % 5 != 0


@pytest.mark.parametrize("label,p", CASES)
def test_augmentation_is_sum_over_all_units(L, label, p):
    lf = L(label, p)
    for n in (1, 2):
        mod = p ** n
        direct = sum((lf.a_p * lf.symbol(a, n) - lf.symbol(a, n - 1)
                      for a in range(mod) if a % p), Fraction(0))
        per_class = sum((lf.criterion_sum(a, n, mode="ap").exact_ap for a in lf.class_reps(n)),
                        Fraction(0))
        assert direct == per_class
        th = lf.theta(n, 3)
        assert th.augmentation() == sum(lf.criterion_sum(a, n, k=3).residue for a in lf.class_reps(n)) % p ** 3


@pytest.mark.parametrize("u", [2, 3, 4, 6])
def test_generator_reindexing(L, u):
    lf = L("11a", 7)
    base = lf.theta(2, 3)
    other = lf.theta(2, 3, gen_power=u)
    size = len(base.coeffs)
    assert other.coeffs == tuple(base.coeffs[(u * i) % size] for i in range(size))


def test_level_one_is_single_class(L):
    th = L("11a", 7).theta(1, 3)
    assert len(th.coeffs) == 1


@pytest.mark.parametrize("label,p", CASES)
def test_level_one_formula(L, label, p):
    # S = (a_p (a_p - 2) - (p - 1)) [0] from the Hecke identity
    lf = L(label, p)
    s = lf.criterion_sum(1, 1, mode="ap")
    assert s.exact_ap == (lf.a_p * (lf.a_p - 2) - (p - 1)) * lf.symbol(0, 0)


@pytest.mark.parametrize("label,p", CASES)
@pytest.mark.parametrize("k", [2, 3])
def test_interpolation(L, label, p, k):
    rep = L(label, p).interpolation_check_trivial(k)
    assert rep.passed
    if label == "37a":
        assert rep.lhs == rep.rhs == 0


def test_eleven_a_at_five(L):
    lf = L("11a", 5)
    assert lf.mu_witness_search(0, 3).certified is False
    rep = lf.mu_witness_search(1, 3)
    assert rep.certified and rep.witness == (1, 1) and rep.valuation == 1
    assert rep.p_in_denominator
    assert mu_lambda_estimate(lf.theta(2, 3)).mu == 1


@pytest.mark.parametrize("label,p", [("11a", 7), ("11a", 3), ("37a", 5), ("37a", 7)])
def test_certificate_soundness_and_cross_check(L, label, p):
    lf = L(label, p)
    rep = lf.mu_witness_search(0, 2)
    assert rep.certified
    n, a = rep.witness
    assert lf.criterion_sum(a, n, k=1).residue % p != 0
    # a unit coefficient at the witness level means mu~ = 0 there
    assert mu_lambda_estimate(lf.theta(n, 2)).mu == 0


def test_rank_positive_starts_at_level_two(L):
    rep = L("37a", 5).mu_witness_search(1, 2)
    assert rep.levels[0] == 2
    assert L("37a", 5).criterion_sum(1, 1, mode="ap").exact_ap == 0


def test_key_inequality(L):
    for label, p in CASES:
        lf = L(label, p)
        audit = lf.key_inequality_audit(1 if label == "11a" else 2, 1)
        assert Fraction(audit.delta_S) == audit.delta * audit.S
        assert audit.hasse_ok


def test_non_integral_sum_raises(engines, monkeypatch):
    lf = PadicLFunction(engines["11a"], 7)
    monkeypatch.setattr(lf, "symbol", lambda a, n: Fraction(1, 7))
    with pytest.raises(NonIntegralError):
        lf.criterion_sum(1, 1)


def test_prime_restrictions(engines):
    with pytest.raises(NotOrdinaryError):
        PadicLFunction(engines["11a"], 19)  # a_19 = 0
    with pytest.raises(CurveError):
        PadicLFunction(engines["11a"], 11)
    with pytest.raises(ValueError):
        PadicLFunction(engines["11a"], 9)


def test_scan_rows(engines, monkeypatch):
    rows = scan_primes(engines["11a"], 60, r=1, n_max=2)
    ps = [row.p for row in rows]
    assert ps == sorted(ps)
    assert 11 not in ps and 19 not in ps and 29 not in ps  # bad, a_19 = 0, a_29 = 0
    assert all(row.verdict == "mu <= 1 certified" for row in rows)

    def boom(self, r, n_max, k=None):
        raise NonIntegralError("synthetic")
    monkeypatch.setattr(PadicLFunction, "mu_witness_search", boom)
    rows = scan_primes(engines["11a"], 20, r=1)
    assert rows and all(row.verdict == "error" and "synthetic" in row.error for row in rows)


def test_mu_lambda_levels(L):
    _, stable = L("37a", 5).mu_lambda_levels([2, 3], 3)
    assert stable == (0, 1)


# -- pure p-adic helpers ----------------------------------------------------------

def test_power_series_basics():
    assert to_power_series(ThetaElement(5, 2, 3, (1, 0, 0, 0, 0))) == (1, 0, 0, 0, 0)
    assert to_power_series(ThetaElement(5, 2, 3, (0, 1, 0, 0, 0))) == (1, 1, 0, 0, 0)


@given(st.sampled_from([(3, 2), (3, 3), (5, 2), (7, 2)]), st.integers(1, 5), st.data())
def test_power_series_round_trip(pn, k, data):
    p, n = pn
    coeffs = tuple(data.draw(st.lists(st.integers(0, p ** k - 1), min_size=p ** (n - 1),
                                      max_size=p ** (n - 1))))
    th = ThetaElement(p, n, k, coeffs)
    assert from_power_series(to_power_series(th), p, n, k).coeffs == coeffs
    if any(c % p ** k for c in coeffs):
        est = mu_lambda_estimate(th)
        assert est.mu == est.mu_group_ring


def test_mu_lambda_examples():
    assert mu_lambda_estimate(ThetaElement(5, 2, 3, (1, 0, 0, 0, 0))).mu == 0
    est = mu_lambda_estimate(ThetaElement(5, 2, 3, (5, 10, 0, 0, 0)))
    assert est.mu == 1
    with pytest.raises(PrecisionExhausted):
        mu_lambda_estimate(ThetaElement(5, 2, 2, (25, 0, 50, 0, 0)))


@given(st.integers(-10 ** 6, 10 ** 6), st.integers(1, 10 ** 6), st.sampled_from([3, 5, 7]))
def test_residue_and_valuation(num, den, p):
    x = Fraction(num, den)
    if x.denominator % p:
        r = residue(x, p, 4)
        assert (r * x.denominator - x.numerator) % p ** 4 == 0
        v = capped_valuation(r, p, 4)
        assert v == min(vp(x, p), 4)
    else:
        with pytest.raises(NonIntegralError):
            residue(x, p, 4)

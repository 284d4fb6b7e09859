import random
from fractions import Fraction

import mpmath
import pytest
from mpmath import mp, mpf

from k4mod import modsym, regulator, units, verify, wedge
from k4mod.mpfield import bloch_wigner, digits_to_bits, zagier_p
from k4mod.qseries import truncation_order
from k4mod.units import IDENTITY, CrossRatioUnit
from k4mod.wedge import ExpVector

DIGITS = 45
GAMMAS = [IDENTITY, ((1, 0), (2, 1)), ((1, 1), (3, 4))]


@pytest.fixture(autouse=True)
def prec45():
    mp.prec = digits_to_bits(DIGITS)


@pytest.fixture(scope="module")
def level11():
    with mp.workprec(digits_to_bits(DIGITS)):
        K = truncation_order(11, DIGITS)
        return regulator.Expander(11, K), regulator.DirectEvaluator(11, K), K


def _points(seed, count=3):
    rng = random.Random(seed)
    return [mpf(rng.uniform(0.45, 3.5)) for _ in range(count)]


def test_bernoulli_coefficients():
    for k in range(2, 16):
        b = regulator._bernoulli_fraction(k)
        assert abs(mpf(b.numerator) / b.denominator - mpmath.bernoulli(k)) < mpf(10) ** -40
    assert regulator._bern_coeff(2) == Fraction(1, 3)
    assert regulator._bern_coeff(3) == 0


def test_siegel_log_coefficients_match_series_log():
    N, K = 11, 40
    for x in [(0, 1), (0, 4), (3, 2)]:
        b2, c0, cs = regulator.siegel_log_coefficients(x, N, K)
        s = units.siegel_expansion(x, N, K).log_series()
        for k in range(1, K):
            assert abs(cs[k] - s.series.coeff(k)) < mpf(10) ** -40
        if x[0] == 0:
            # log of the leading coefficient 1 - zeta^x2
            assert abs(c0 - s.const.real) < mpf(10) ** -40


@pytest.mark.parametrize("g", GAMMAS)
def test_log_and_darg_pointwise(level11, g):
    ex, de, K = level11
    v = ExpVector(11, [((0, 1), 1), ((0, 3), -1)])
    la = regulator.log_abs_function(v, K, g)
    da = regulator.darg_function(v, K, g)
    for y in _points(1):
        val, dlog = de._v_at(v, g, y)
        jac = 1 if y >= 1 else -1 / (y * y)
        assert abs(la(y) - mpmath.log(abs(val))) < mpf(10) ** -40
        assert abs(da(y) - ((1j * dlog) * jac).imag) < mpf(10) ** -40


@pytest.mark.parametrize("g", GAMMAS)
def test_bloch_wigner_and_zagier_pointwise(level11, g):
    ex, de, _ = level11
    u0 = CrossRatioUnit.make([(0, 1), (0, 2), (0, 3), (0, 5)], 11)
    u = u0.slash(g)
    for y in _points(2):
        uv, _ = de.unit_at(u0, g, y)
        assert abs(ex.bloch_wigner(u)(y) - bloch_wigner(uv)) < mpf(10) ** -40
        for m in (3, 4, 5):
            assert abs(ex.zagier(u, m)(y) - zagier_p(m, uv)) < mpf(10) ** -40


@pytest.mark.parametrize("N", [14, 15])
def test_bloch_wigner_other_levels(N):
    K = truncation_order(N, DIGITS)
    ex, de = regulator.Expander(N, K), regulator.DirectEvaluator(N, K)
    rng = random.Random(N)
    done = 0
    while done < 3:
        q = [(0, j) for j in rng.sample(range(1, N), 4)]
        if not units.is_distinct(q, N):
            continue
        done += 1
        u0 = CrossRatioUnit.make(q, N)
        g = GAMMAS[done % len(GAMMAS)]
        for y in _points(done, 2):
            uv, _ = de.unit_at(u0, g, y)
            assert abs(ex.bloch_wigner(u0.slash(g))(y) - bloch_wigner(uv)) < mpf(10) ** -40


def test_r32_pointwise_against_direct(level11):
    ex, _, K = level11
    xi = wedge.xi1(1, 3, 11)
    cyc = modsym.parse_cycle(modsym.CYCLE_11A3)
    assert verify.pointwise_check(xi, cyc, K, count=2, expander=ex, terms=2) < mpf(10) ** -40


@pytest.mark.parametrize("n", [3, 4, 5])
def test_higher_weight_forms_pointwise(level11, n):
    ex, de, _ = level11
    g = ((1, 0), (2, 1))
    u0 = CrossRatioUnit.make([(0, 1), (0, 2), (0, 4), (0, 5)], 11)
    v = ExpVector(11, [((0, 2), 1), ((0, 5), -1)])
    f = ex.phi(u0.slash(g), v, n, g)
    for y in _points(3 + n, 2):
        assert abs(f(y) - de.rn2(u0.quad, v, g, y, n)) < mpf(10) ** -40


def test_weight_three_general_form_is_r32(level11):
    ex, _, _ = level11
    u = CrossRatioUnit.make([(0, 1), (0, 2), (0, 3), (0, 5)], 11)
    v = ExpVector(11, [((0, 1), 1), ((0, 3), -1)])
    d = ex.phi(u, v, 3) - ex.r32(u, v)
    for y in _points(4):
        assert abs(d(y)) < mpf(10) ** -45


def test_trivial_v_gives_zero():
    mp.prec = digits_to_bits(30)
    xi = wedge.xi1(4, 4, 11)
    cyc = modsym.parse_cycle(modsym.CYCLE_11A3)
    assert regulator.integrate_cycle(xi, cyc, digits=30).value == 0
    assert regulator.integrate_cycle(wedge.xi1(1, 3, 11), modsym.Cycle([]), digits=30).value == 0


def test_forms_are_integrable(level11):
    ex, _, K = level11
    xi = wedge.xi1(2, 5, 11)
    for t in xi.terms:
        for g in GAMMAS:
            assert regulator.r32_form(t, g, K, ex).phi.is_integrable()


def test_frozen_values_level_11():
    mp.prec = digits_to_bits(30)
    K = truncation_order(11, 30)
    ex = regulator.Expander(11, K)
    path = modsym.Cycle([(1, IDENTITY)])
    v = regulator.integrate_cycle(wedge.xi1(1, 2, 11), path, expander=ex).value
    assert abs(v - mpf("0.0715579435552994863901146667227")) < mpf(10) ** -27
    cyc = modsym.parse_cycle(modsym.CYCLE_11A3)
    v = regulator.integrate_cycle(wedge.xi1(1, 3, 11), cyc, expander=ex).value
    assert abs(v - mpf("0.314600551024833778685300114646")) < mpf(10) ** -27


def test_conjugate_cycle_gives_same_integral():
    # the form is invariant under complex conjugation
    mp.prec = digits_to_bits(30)
    K = truncation_order(11, 30)
    ex = regulator.Expander(11, K)
    cyc = modsym.parse_cycle(modsym.CYCLE_11A3)
    xi = wedge.xi1(1, 3, 11)
    a = regulator.integrate_cycle(xi, cyc, expander=ex).value
    b = regulator.integrate_cycle(xi, cyc.star(), expander=ex).value
    assert abs(a - b) < mpf(10) ** -27


def test_per_term_agrees_with_aggregated():
    mp.prec = digits_to_bits(30)
    K = truncation_order(11, 30)
    ex = regulator.Expander(11, K)
    cyc = modsym.parse_cycle(modsym.CYCLE_11A3)
    xi = wedge.xi1(2, 5, 11)
    a = regulator.integrate_cycle(xi, cyc, expander=ex)
    b = regulator.integrate_cycle(xi, cyc, per_term=True, expander=ex)
    assert abs(a.value - b.value) < mpf(10) ** -27
    assert len(b.per_term) == len([t for t in xi.terms if not t.v.is_zero()])


def test_integrate_many_matches_single():
    mp.prec = digits_to_bits(30)
    K = truncation_order(11, 30)
    ex = regulator.Expander(11, K)
    cyc = modsym.parse_cycle(modsym.CYCLE_11A3)
    xis = [wedge.xi1(1, 3, 11), wedge.xi1(2, 7, 11)]
    many = regulator.integrate_many(xis, cyc, K, expander=ex)
    for xi, r in zip(xis, many):
        assert abs(r.value - regulator.integrate_cycle(xi, cyc, expander=ex).value) < mpf(10) ** -27


@pytest.mark.slow
def test_mellin_value_matches_quadrature():
    mp.prec = digits_to_bits(40)
    N = 11
    K = truncation_order(N, 36)
    ex, de = regulator.Expander(N, K), regulator.DirectEvaluator(N, K)
    t = wedge.xi1(1, 3, N).terms[1]
    g = ((1, 0), (2, 1))
    val = regulator.r32_form(t, g, K, ex).integral()
    # beyond y = 200 both halves are below exp(-2 pi 200 / 11) ~ 1e-49
    cuts = [1, 2, 8, 40, 200]
    q = mpmath.quad(lambda y: de.r32(t.quad, t.v, g, y), cuts)
    q += mpmath.quad(lambda x: de.r32(t.quad, t.v, g, 1 / x) / x ** 2, cuts)
    assert abs(val - q) < mpf(10) ** -33

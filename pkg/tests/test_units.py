import random
from fractions import Fraction

import mpmath
import pytest
from mpmath import mp, mpc, mpf

from k4mod import units
from k4mod.mpfield import digits_to_bits
from k4mod.qseries import QExpansion, truncation_order
from k4mod.units import CrossRatioUnit, UnitExpr, cross_ratio_expansion, wp_cross_ratio


@pytest.fixture(autouse=True)
def prec40():
    mp.prec = digits_to_bits(40)


def _random_quads(N, count, seed):
    rng = random.Random(seed)
    idx = [(i, j) for i in range(N) for j in range(N) if (i, j) != (0, 0)]
    out = []
    while len(out) < count:
        q = [rng.choice(idx) for _ in range(4)]
        if units.is_distinct(q, N):
            out.append(q)
    return out


def _siegel_abs_oracle(x, N, tau):
    """|g_x(tau)| from mpmath q-Pochhammer symbols."""
    x1, x2 = x[0] % N, x[1] % N
    q = mpmath.exp(2j * mp.pi * tau)
    qz = mpmath.exp(2j * mp.pi * (x1 * tau + x2) / N)
    b2 = mpf(x1) ** 2 / N ** 2 - mpf(x1) / N + mpf(1) / 6
    return abs(mpmath.exp(1j * mp.pi * b2 * tau) * mpmath.qp(qz, q) * mpmath.qp(q / qz, q))


@pytest.mark.parametrize("x", [(0, 1), (0, 3), (2, 5), (3, 0), (6, 4)])
def test_siegel_modulus_matches_product(x):
    N = 7
    K = truncation_order(N, 40)
    s = units.siegel_expansion(x, N, K)
    tau = mpc("0.13", "1.05")
    assert abs(abs(s(tau)) - _siegel_abs_oracle(x, N, tau)) < mpf(10) ** -35


def test_siegel_valuation_matches_expansion():
    N = 9
    K = 60
    for x in [(0, 1), (1, 0), (2, 7), (4, 4)]:
        v = UnitExpr.siegel(x, N)
        s = units.siegel_expansion(x, N, K)
        assert s.mu + Fraction(s.val, N) == v.valuation() / N


@pytest.mark.parametrize("N", [7, 11])
def test_cross_ratio_matches_weierstrass(N):
    K = truncation_order(N, 40)
    for q in _random_quads(N, 6, seed=N):
        u = CrossRatioUnit.make(q, N)
        diff = cross_ratio_expansion(u, K) - wp_cross_ratio(q, N, K)
        assert diff.max_abs() < mpf(10) ** -40


@pytest.mark.parametrize("N", [6, 7, 10])
def test_steinberg_relation(N):
    K = truncation_order(N, 40)
    one = QExpansion.constant(1, N, K)
    for q in _random_quads(N, 8, seed=100 + N):
        u = CrossRatioUnit.make(q, N)
        s = cross_ratio_expansion(u, K) + cross_ratio_expansion(u.complement(), K) - one
        assert s.max_abs() < mpf(10) ** -40


def test_slash_is_composition():
    # (u|g)(tau) = u(g tau); the right side uses the Weierstrass oracle at g tau
    N = 11
    K = truncation_order(N, 40)
    q = [(0, 1), (0, 2), (0, 3), (0, 5)]
    u = CrossRatioUnit.make(q, N)
    tau = mpc("0.1", "1.2")
    for g in (((1, 1), (0, 1)), ((1, 0), (1, 1)), ((2, 1), (1, 1))):
        (a, b), (c, d) = g
        gt = (a * tau + b) / (c * tau + d)
        lhs = cross_ratio_expansion(u.slash(g), K)(tau)
        rhs = wp_cross_ratio(q, N, K)(gt)
        assert abs(lhs - rhs) < mpf(10) ** -15 * abs(rhs)


def test_cusp_value_is_limit():
    N = 11
    K = truncation_order(N, 40)
    u = CrossRatioUnit.make([(0, 1), (0, 2), (0, 3), (0, 5)], N)
    for g in (units.IDENTITY, units.SIGMA, ((1, 0), (3, 1))):
        c = units.cusp_value(u, g)
        w = wp_cross_ratio(list(u.slash(g).quad), N, K)
        far = w(mpc(0, 400))
        if isinstance(c, str):
            assert (c == units.ZERO and abs(far) < 1e-10) or (c == units.INFINITY and abs(far) > 1e10)
        else:
            assert abs(far - c) < mpf(10) ** -30


def test_cusp_value_galois_conjugates_are_real_pairs():
    N = 11
    u = units.u1(1, 2, 3, 5, N)
    vals = [units.cusp_value(u, units.IDENTITY, t) for t in units.units_group(N)]
    for t, z in zip(units.units_group(N), vals):
        zc = units.cusp_value(u, units.IDENTITY, N - t)
        assert abs(zc - mpmath.conj(z)) < mpf(10) ** -35


@pytest.mark.parametrize("N", [11, 13, 17])
def test_principal_divisor_has_degree_zero(N):
    for quad in ((1, 2, 3, 5), (0, 1, 3, 4), (1, 3, 4, 6)):
        v = units.u1(*quad, N).as_units()
        orders = units.order_at_cusps(v)
        assert sum(o["order"] for o in orders) == 0
        orders = units.order_at_cusps(v, level="gamma")
        assert sum(o["order"] for o in orders) == 0


def test_degree_formulas_small_primes():
    for N in (11, 13):
        assert units.degree(units.u1(1, 2, 3, 5, N).as_units()) == round(Fraction(11 * N * N, 840))
        assert units.degree(units.u1(0, 1, 3, 4, N).as_units()) == round(Fraction(N * N, 35))


def test_degree_within_mason_bound():
    # a nonconstant S-unit solution of u + (1-u) = 1 on X_1(N)
    from k4mod.modsym import gamma1_genus

    for N in (11, 13, 17):
        u = units.u1(1, 2, 3, 5, N)
        s = len(units.gamma1_cusps(N))
        assert units.degree(u.as_units()) <= units.mason_bound(gamma1_genus(N), s)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        CrossRatioUnit.make([(0, 1), (0, 10), (0, 3), (0, 5)], 11)
    with pytest.raises(ValueError):
        units.wp_expansion((0, 0), 7, 10)
    with pytest.raises(ValueError):
        units.mason_bound(1, 0)

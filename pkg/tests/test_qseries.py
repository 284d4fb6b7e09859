from fractions import Fraction

import mpmath
import pytest
from mpmath import mp, mpc, mpf

from k4mod.mpfield import digits_to_bits
from k4mod.qseries import QExpansion, exp_series, from_fixed, to_fixed, truncation_order

N = 5
K = 80


@pytest.fixture(autouse=True)
def prec50():
    mp.prec = digits_to_bits(50)


def _euler(order):
    """prod (1 - t^n) by the pentagonal number theorem (exact integers)."""
    c = [0] * order
    k = 0
    while True:
        hit = False
        for m in (k, -k) if k else (0,):
            e = m * (3 * m - 1) // 2
            if e < order:
                c[e] = (-1) ** (abs(m) % 2)
                hit = True
        if not hit:
            break
        k += 1
    return c


def _series(coeffs):
    return QExpansion.from_coeffs(N, coeffs, K)


def _close(s, t, tol=mpf(10) ** -45):
    return (s - t).max_abs() < tol


def test_fixed_point_round_trip():
    w = 200
    for x in (mpf(1) / 3, -mp.pi, mpf("1e-30"), Fraction(-7, 11), 5):
        assert abs(from_fixed(to_fixed(x, w), w) - mpmath.mpmathify(x if not isinstance(x, Fraction) else mpf(x.numerator) / x.denominator)) < mpf(2) ** -190


def test_product_matches_direct_product():
    s = QExpansion.constant(1, N, K)
    for n in range(1, K):
        s = s * _series([1] + [0] * (n - 1) + [-1])
    assert _close(s, _series(_euler(K)))


def test_inverse():
    e = _series(_euler(K))
    one = e * e.inverse()
    assert _close(one, QExpansion.constant(1, N, K))
    # 1/(1 - t) = sum t^k
    g = _series([1, -1]).inverse()
    assert _close(g, _series([1] * K))


def test_inverse_with_valuation_and_mu():
    s = QExpansion.from_coeffs(N, [2, 3, mpc(1, 1)], K, val=3, mu=Fraction(1, 7))
    inv = s.inverse()
    assert inv.val == -3 and inv.mu == Fraction(-1, 7)
    prod = s * inv
    assert abs(prod.coeff(0) - 1) < mpf(10) ** -45
    tau = mpc("0.1", "1.3")
    assert abs(s(tau) * inv(tau) - 1) < mpf(10) ** -30


def test_log_and_exp_round_trip():
    e = _series(_euler(K))
    ls = e.log_series()
    assert ls.tau_coeff == 0 and abs(ls.const) < mpf(10) ** -45
    back = exp_series(ls.series)
    assert _close(back, e)
    # log prod (1 - t^n) = -sum sigma_{-1}(k) t^k
    for k in (1, 6, 12):
        sig = sum(mpf(1) / d for d in range(1, k + 1) if k % d == 0)
        assert abs(ls.series.coeff(k) + sig) < mpf(10) ** -45


def test_rational_power():
    e = _series(_euler(K))
    r = e.pow_rational(Fraction(1, 3))
    assert _close(r * r * r, e)
    sq = _series([4, 1, 2]).pow_rational(Fraction(1, 2))
    assert abs(sq.coeff(0) - 2) < mpf(10) ** -45


def test_eval_matches_mpmath_qp():
    e = _series(_euler(K))
    tau = mpc("0.2", "1.1")
    t = mpmath.exp(2j * mp.pi * tau / N)
    val, bound = e.eval_at(tau)
    assert abs(val - mpmath.qp(t)) < max(bound, mpf(10) ** -40)
    with pytest.raises(ValueError):
        e.eval_at(mpc(0, -1))


def test_eval_bound_enforced():
    e = _series(_euler(K))
    with pytest.raises(ArithmeticError):
        e.eval_at(mpc(0, "0.01"), tol=mpf(10) ** -40)


def test_truncation_order_monotone():
    assert truncation_order(11, 40) > truncation_order(11, 30)
    assert truncation_order(15, 30) > truncation_order(11, 30)
    # the neglected tail e^{-2 pi K / N} must be below the target
    K11 = truncation_order(11, 30)
    assert mpmath.exp(-2 * mp.pi * K11 / 11) < mpf(10) ** -30


def test_zero_series_errors():
    z = QExpansion.zero(N, K)
    assert z.is_zero()
    with pytest.raises(ZeroDivisionError):
        z.inverse()
    with pytest.raises(ValueError):
        z.log_series()

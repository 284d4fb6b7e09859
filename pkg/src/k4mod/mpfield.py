"""High-precision special functions on top of mpmath.

Everything here works at the ambient ``mpmath.mp`` precision.  Use
:func:`precision` to set it for a block of code.
"""

from __future__ import annotations

import contextlib
from fractions import Fraction
from functools import lru_cache

import mpmath
from mpmath import mp, mpf, mpc

DEFAULT_PREC = 192
MIN_PREC = 128


@contextlib.contextmanager
def precision(bits=DEFAULT_PREC):
    """Run a block at ``bits`` bits of working precision (at least 128)."""
    if bits < MIN_PREC:
        raise ValueError(f"precision must be at least {MIN_PREC} bits")
    with mp.workprec(bits):
        yield


def digits_to_bits(digits):
    return max(MIN_PREC, int(digits * 3.3219280948873626) + 64)


def fmpf(x):
    """Exact rational (or int) to mpf at the current precision."""
    x = Fraction(x)
    return mpf(x.numerator) / x.denominator


def bernoulli_poly2(x):
    """B_2(x) = x^2 - x + 1/6 as an exact Fraction."""
    x = Fraction(x)
    return x * x - x + Fraction(1, 6)


# ---------------------------------------------------------------------------
# Incomplete gamma for integer s >= -1


def _e1_series(x):
    # E1(x) = -gamma - log x - sum_{k>=1} (-x)^k / (k k!)
    eps = mpf(2) ** (-mp.prec - 8)
    s = mpf(0)
    term = mpf(1)
    k = 0
    while True:
        k += 1
        term *= -x / k
        t = term / k
        s += t
        if abs(t) < eps:
            break
    return -mp.euler - mpmath.log(x) - s


def _e1_cfrac(x):
    # E1(x) = e^{-x} / (x + 1 - 1/(x + 3 - 4/(x + 5 - ...))), modified Lentz
    tiny = mpf(2) ** (-2 * mp.prec)
    eps = mpf(2) ** (-mp.prec - 4)
    b = x + 1
    f = b
    c = b
    d = mpf(0)
    k = 0
    while True:
        k += 1
        a = -mpf(k * k)
        b += 2
        d = b + a * d
        if d == 0:
            d = tiny
        c = b + a / c
        if c == 0:
            c = tiny
        d = 1 / d
        delta = c * d
        f *= delta
        if abs(delta - 1) < eps:
            break
        if k > 100 * mp.prec:
            raise ArithmeticError("E1 continued fraction did not converge")
    return mpmath.exp(-x) / f


def exp_integral_e1(x):
    """E1(x) = Gamma(0, x) for real x > 0."""
    x = mpf(x)
    if x <= 0:
        raise ValueError("E1 needs x > 0")
    if x < 3:
        with mp.workprec(mp.prec + 16):
            return +_e1_series(x)
    return _e1_cfrac(x)


def incomplete_gamma(s, x):
    """Upper incomplete gamma Gamma(s, x) for integer s >= -1 and x > 0."""
    s = int(s)
    x = mpf(x)
    if x <= 0:
        raise ValueError("incomplete_gamma needs x > 0")
    if s < -1:
        raise ValueError("only s >= -1 is supported")
    if s >= 1:
        term = mpf(1)
        total = mpf(1)
        for k in range(1, s):
            term = term * x / k
            total += term
        return mpmath.factorial(s - 1) * mpmath.exp(-x) * total
    e1 = exp_integral_e1(x)
    if s == 0:
        return e1
    # Gamma(0,x) = -Gamma(-1,x) + x^{-1} e^{-x}
    return mpmath.exp(-x) / x - e1


# ---------------------------------------------------------------------------
# Polylogarithms


@lru_cache(maxsize=None)
def _bernoulli_cached(n, prec):
    with mp.workprec(prec):
        return mpmath.bernoulli(n)


def _li2_bernoulli(z):
    """Li_2(z) via the Bernoulli series in w = -log(1-z); needs |w| < 2 pi."""
    w = -mpmath.log(1 - z)
    eps = mpf(2) ** (-mp.prec - 8)
    total = w - w * w / 4
    wp = w
    fact = mpf(1)
    n = 1
    while True:
        n += 1
        wp *= w
        fact *= n
        if n % 2:
            continue
        # term B_n w^{n+1}/(n+1)!
        t = _bernoulli_cached(n, mp.prec) * wp * w / (fact * (n + 1))
        total += t
        if abs(t) < eps * (1 + abs(total)):
            break
    return total


def bloch_wigner(z):
    """Bloch-Wigner dilogarithm D(z); D(0) = D(1) = D(infinity) = 0."""
    if z is None or mpmath.isinf(z):
        return mpf(0)
    z = mpc(z)
    if z == 0 or z == 1:
        return mpf(0)
    sign = 1
    with mp.workprec(mp.prec + 20):
        if abs(z) > 1:
            z = 1 / z
            sign = -sign
        if z.real > 0.5:
            z = 1 - z
            sign = -sign
            if abs(z) > 1:
                z = 1 / z
                sign = -sign
        if z == 0:
            return mpf(0)
        li2 = _li2_bernoulli(z)
        val = li2.imag + mpmath.arg(1 - z) * mpmath.log(abs(z))
    return sign * (+val)


def polylog(k, z):
    """Li_k(z) for integer k >= 1 and |z| <= 1, principal branch."""
    z = mpc(z)
    if k == 1:
        return -mpmath.log(1 - z)
    eps = mpf(2) ** (-mp.prec - 8)
    if abs(z) <= 0.5:
        total = mpc(0)
        zn = mpc(1)
        n = 0
        while True:
            n += 1
            zn *= z
            t = zn / mpf(n) ** k
            total += t
            if abs(t) < eps:
                return total
    # expansion in mu = log z, valid for |mu| < 2 pi
    if z == 1:
        return mpmath.zeta(k)
    mu = mpmath.log(z)
    harm = sum(mpf(1) / j for j in range(1, k))
    total = mu ** (k - 1) / mpmath.factorial(k - 1) * (harm - mpmath.log(-mu))
    term = mpc(1)
    m = 0
    while True:
        if m != k - 1:
            t = mpmath.zeta(k - m) * term
            total += t
            if m > k and t != 0 and abs(t) < eps:
                break
        m += 1
        term = term * mu / m
    return total


def zagier_p(m, z):
    """Zagier's single-valued polylogarithm P_m(z) (real valued).

    P_m = Re_m( sum_{k<m} 2^k B_k / k! log^k|z| Li_{m-k}(z) ) with Re_m = Re
    for odd m and Im for even m, B_1 = -1/2.
    """
    if m < 2:
        raise ValueError("m must be at least 2")
    if z is None or mpmath.isinf(z):
        return mpf(0)
    z = mpc(z)
    if z == 0:
        return mpf(0)
    sign = 1
    with mp.workprec(mp.prec + 20):
        if abs(z) > 1:
            z = 1 / z
            if m % 2 == 0:
                sign = -1
        if z == 1:
            val = mpmath.zeta(m) if m % 2 else mpf(0)
            return sign * (+val)
        lz = mpmath.log(abs(z))
        total = mpc(0)
        for k in range(m):
            bk = mpmath.bernoulli(k) if k != 1 else mpf(-0.5)
            if bk == 0:
                continue
            total += (mpf(2) ** k * bk / mpmath.factorial(k)) * lz ** k * polylog(m - k, z)
        val = total.real if m % 2 else total.imag
    return sign * (+val)


def svp(m, z):
    """Single-valued polylogarithm L^_m(z): P_m(z) for odd m, i P_m(z) for even m."""
    p = zagier_p(m, z)
    return mpc(p) if m % 2 else mpc(0, p)


def cross_ratio4(a, b, c, d):
    """[a, b, c, d] = ((c - a)/(c - b)) / ((d - a)/(d - b))."""
    return ((c - a) / (c - b)) / ((d - a) / (d - b))

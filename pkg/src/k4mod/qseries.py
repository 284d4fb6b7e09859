"""Truncated Puiseux series in q^{1/N} with fixed-point complex coefficients.

A :class:`QExpansion` stands for

    q^mu * sum_{val <= k < order} c_k q^{k/N},   known up to O(q^{order/N}),

where mu is an exact Fraction.  Coefficients are stored as integers scaled by
2**bits, so sums are exact and products are a single big-integer multiply.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import mp, mpf, mpc

from . import _fixed
from .mpfield import fmpf


def work_bits():
    """Fixed-point scale used for new series at the current precision."""
    return mp.prec + _fixed.GUARD_BITS


def to_fixed(x, w):
    """round(x * 2**w) for a real mpmath number (or int/Fraction)."""
    if isinstance(x, int):
        return x << w
    if isinstance(x, Fraction):
        n = x.numerator << w
        q, r = divmod(n, x.denominator)
        return q + (1 if 2 * r >= x.denominator else 0)
    x = mpf(x)
    sign, man, exp, _ = x._mpf_
    if not man:
        return 0
    e = exp + w
    v = man << e if e >= 0 else _fixed.rshift_round(man, -e)
    return -v if sign else v


def from_fixed(n, w):
    return mpf((n, -w)) if n else mpf(0)


def truncation_order(N, digits, y_min=1):
    """Number of q^{1/N} terms so that exp(-2 pi K y_min / N) < 10^-(digits+10)."""
    return int(math.ceil(N * (digits + 10) * math.log(10) / (2 * math.pi * y_min))) + 1


@dataclass(frozen=True)
class LogSeries:
    """log u = tau_coeff * tau + const + series, series with zero constant term."""

    tau_coeff: object
    const: object
    series: "QExpansion"


class QExpansion:
    __slots__ = ("N", "val", "re", "im", "order", "mu", "bits")

    def __init__(self, N, val, re, im, order, mu=Fraction(0), bits=None):
        self.N = int(N)
        self.val = int(val)
        self.re = list(re)
        self.im = list(im)
        self.order = int(order)
        self.mu = Fraction(mu)
        self.bits = work_bits() if bits is None else bits
        n = self.order - self.val
        if n < 0:
            raise ValueError("truncation order below valuation")
        if len(self.re) != n or len(self.im) != n:
            raise ValueError("coefficient length does not match order - val")

    # -- construction -------------------------------------------------------

    @classmethod
    def from_coeffs(cls, N, coeffs, order, val=0, mu=0, bits=None):
        w = work_bits() if bits is None else bits
        n = order - val
        coeffs = list(coeffs)[:n]
        coeffs.extend([0] * (n - len(coeffs)))
        re, im = [], []
        for c in coeffs:
            if isinstance(c, (int, Fraction)):
                re.append(to_fixed(c, w))
                im.append(0)
            else:
                c = mpc(c)
                re.append(to_fixed(c.real, w))
                im.append(to_fixed(c.imag, w))
        return cls(N, val, re, im, order, mu, w)._normalized()

    @classmethod
    def constant(cls, c, N, order, bits=None):
        return cls.from_coeffs(N, [c], order, bits=bits)

    @classmethod
    def monomial(cls, k, N, order, c=1, bits=None):
        if k >= order:
            return cls.zero(N, order, bits)
        return cls.from_coeffs(N, [c], order, val=k, bits=bits)

    @classmethod
    def zero(cls, N, order, bits=None):
        return cls(N, order, [], [], order, 0, bits)

    def _normalized(self):
        i = 0
        n = len(self.re)
        while i < n and self.re[i] == 0 and self.im[i] == 0:
            i += 1
        if i == 0:
            return self
        return QExpansion(self.N, self.val + i, self.re[i:], self.im[i:], self.order, self.mu, self.bits)

    # -- inspection ----------------------------------------------------------

    def is_zero(self):
        return not self.re

    def coeff(self, k):
        """Coefficient of q^{mu + k/N} as an mpc."""
        if k >= self.order:
            raise IndexError("coefficient beyond truncation order")
        if k < self.val:
            return mpc(0)
        i = k - self.val
        return mpc(from_fixed(self.re[i], self.bits), from_fixed(self.im[i], self.bits))

    def coeffs(self, start=None):
        start = self.val if start is None else start
        return [self.coeff(k) for k in range(start, self.order)]

    def leading(self):
        if self.is_zero():
            raise ZeroDivisionError("zero series has no leading coefficient")
        return self.coeff(self.val)

    def max_abs(self):
        """Largest coefficient modulus (an mpf)."""
        best = 0
        for a, b in zip(self.re, self.im):
            m = max(abs(a), abs(b))
            if m > best:
                best = m
        return from_fixed(best, self.bits) * mpmath.sqrt(2) if best else mpf(0)

    def __repr__(self):
        return f"QExpansion(N={self.N}, val={self.val}, order={self.order}, mu={self.mu})"

    # -- alignment -------------------------------------------------------------

    def rescale(self, L):
        """Same series expressed in q^{1/L}, L a multiple of N."""
        if L == self.N:
            return self
        if L % self.N:
            raise ValueError("new level must be a multiple of the old one")
        f = L // self.N
        n = len(self.re)
        re = [0] * ((n - 1) * f + 1) if n else []
        im = list(re)
        for i in range(n):
            re[i * f] = self.re[i]
            im[i * f] = self.im[i]
        order = self.order * f
        pad = order - self.val * f - len(re)
        re.extend([0] * pad)
        im.extend([0] * pad)
        return QExpansion(L, self.val * f, re, im, order, self.mu, self.bits)

    def _aligned(self, other):
        if self.bits != other.bits:
            raise ValueError("series built at different precisions")
        if self.N == other.N:
            return self, other
        L = self.N * other.N // math.gcd(self.N, other.N)
        return self.rescale(L), other.rescale(L)

    def truncate(self, order):
        if order >= self.order:
            return self
        if order <= self.val:
            return QExpansion.zero(self.N, order, self.bits)._with_mu(self.mu)
        n = order - self.val
        return QExpansion(self.N, self.val, self.re[:n], self.im[:n], order, self.mu, self.bits)

    def _with_mu(self, mu):
        return QExpansion(self.N, self.val, self.re, self.im, self.order, mu, self.bits)

    # -- ring operations -----------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, QExpansion):
            other = QExpansion.constant(other, self.N, self.order, self.bits)
        a, b = self._aligned(other)
        if a.is_zero() and not b.is_zero():
            a = a._with_mu(b.mu)
        if b.is_zero():
            b = b._with_mu(a.mu)
        if a.mu != b.mu:
            raise ValueError("cannot add series with different q^mu prefactors")
        order = min(a.order, b.order)
        val = min(a.val, b.val)
        n = max(order - val, 0)
        re = [0] * n
        im = [0] * n
        for s in (a, b):
            off = s.val - val
            for i in range(min(len(s.re), n - off)):
                re[off + i] += s.re[i]
                im[off + i] += s.im[i]
        return QExpansion(a.N, val if n else order, re, im, order, a.mu, a.bits)._normalized()

    __radd__ = __add__

    def __neg__(self):
        return QExpansion(self.N, self.val, [-x for x in self.re], [-x for x in self.im], self.order, self.mu, self.bits)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        """Multiply by a scalar (int, Fraction, mpf or mpc)."""
        w = self.bits
        if isinstance(c, (int, Fraction)):
            cr, ci = to_fixed(c, w), 0
        else:
            c = mpc(c)
            cr, ci = to_fixed(c.real, w), to_fixed(c.imag, w)
        rs = _fixed.rshift_round
        re = [rs(a * cr - b * ci, w) for a, b in zip(self.re, self.im)]
        im = [rs(a * ci + b * cr, w) for a, b in zip(self.re, self.im)]
        return QExpansion(self.N, self.val, re, im, self.order, self.mu, w)._normalized()

    def __mul__(self, other):
        if not isinstance(other, QExpansion):
            return self.scale(other)
        a, b = self._aligned(other)
        val = a.val + b.val
        n = min(a.order - a.val, b.order - b.val)
        order = val + n
        if a.is_zero() or b.is_zero():
            return QExpansion.zero(a.N, order, a.bits)._with_mu(a.mu + b.mu)
        re, im = _fixed.cmul(a.re, a.im, b.re, b.im, n, a.bits)
        return QExpansion(a.N, val, re, im, order, a.mu + b.mu, a.bits)._normalized()

    __rmul__ = __mul__

    def _unit_part(self):
        """(leading coefficient c, fixed-point series of self/(c q^val))."""
        c = self.leading()
        inv = self.scale(1 / c)
        return c, inv.re, inv.im

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("division by the zero series")
        c, re, im = self._unit_part()
        one = 1 << self.bits
        re = list(re)
        re[0], im = one, [0] + list(im[1:])
        n = len(re)
        ir, ii = _fixed.cinv(re, im, n, self.bits)
        s = QExpansion(self.N, -self.val, ir, ii, -self.val + n, -self.mu, self.bits)
        return s.scale(1 / c)

    def __truediv__(self, other):
        if not isinstance(other, QExpansion):
            if isinstance(other, (int, Fraction)):
                return self.scale(Fraction(1) / Fraction(other))
            return self.scale(1 / mpc(other))
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def log_series(self):
        """Split log of the series into tau-linear part, constant and power series."""
        if self.is_zero():
            raise ValueError("log of the zero series")
        c, re, im = self._unit_part()
        one = 1 << self.bits
        re = list(re)
        re[0], im = one, [0] + list(im[1:])
        n = len(re)
        lr, li = _fixed.clog(re, im, n, self.bits)
        series = QExpansion(self.N, 0, lr, li, n, 0, self.bits)._normalized()
        tau_coeff = 2j * mp.pi * fmpf(self.mu + Fraction(self.val, self.N))
        return LogSeries(mpc(tau_coeff), mpmath.log(c), series)

    def __pow__(self, e):
        return self.pow_rational(e)

    def pow_rational(self, e):
        """Principal-branch power; the valuation and mu are multiplied by e."""
        e = Fraction(e)
        if self.is_zero():
            if e > 0:
                return self
            raise ZeroDivisionError("non-positive power of the zero series")
        if e.denominator == 1 and 1 <= e <= 4:
            acc = self
            for _ in range(int(e) - 1):
                acc = acc * self
            return acc
        ls = self.log_series()
        body = exp_series(ls.series.scale(e))
        lead = mpmath.exp(ls.const * mpf(e.numerator) / e.denominator)
        tot = self.val * e
        if tot.denominator == 1:
            val, mu = int(tot), self.mu * e
        else:
            val, mu = 0, e * (self.mu + Fraction(self.val, self.N))
        s = QExpansion(self.N, val, body.re, body.im, val + body.order, mu, self.bits)
        return s.scale(lead)

    # -- evaluation ------------------------------------------------------------

    def tail_bound(self, t_abs):
        """Bound for the omitted terms at |q^{1/N}| = t_abs (< 1)."""
        t_abs = mpf(t_abs)
        n = len(self.re)
        if n == 0:
            return mpf(0)
        lo = max(0, n - max(1, n // 10))
        env = max(max(abs(self.re[i]), abs(self.im[i])) for i in range(lo, n))
        env = from_fixed(env, self.bits) * 2 + mpf(2) ** (-self.bits)
        # polynomial growth allowance plus a x100 safety factor
        return 100 * env * (1 + mpf(self.order)) ** 2 * t_abs ** self.order / (1 - t_abs)

    def eval_at(self, tau, tol=None):
        """Value at tau (Im tau > 0) and a bound on the truncation error."""
        tau = mpc(tau)
        if tau.imag <= 0:
            raise ValueError("tau must lie in the upper half plane")
        t = mpmath.exp(2j * mp.pi * tau / self.N)
        total = mpc(0)
        if self.re:
            tp = t ** self.val
            for a, b in zip(self.re, self.im):
                if a or b:
                    total += mpc(from_fixed(a, self.bits), from_fixed(b, self.bits)) * tp
                tp *= t
        pref = mpmath.exp(2j * mp.pi * fmpf(self.mu) * tau) if self.mu else 1
        value = total * pref
        bound = self.tail_bound(abs(t)) * abs(pref)
        if tol is not None and bound > tol:
            raise ArithmeticError(f"truncation tail {mpmath.nstr(bound, 5)} exceeds tolerance")
        return value, bound

    def __call__(self, tau):
        return self.eval_at(tau)[0]


def exp_series(s):
    """exp of a series with zero constant term (valuation >= 1)."""
    if s.mu != 0:
        raise ValueError("exp_series needs mu = 0")
    n = s.order
    if s.is_zero():
        return QExpansion.constant(1, s.N, n, s.bits)
    if s.val < 1:
        raise ValueError("exp_series needs zero constant term")
    re = [0] * s.val + s.re
    im = [0] * s.val + s.im
    er, ei = _fixed.cexp(re, im, n, s.bits)
    return QExpansion(s.N, 0, er, ei, n, 0, s.bits)


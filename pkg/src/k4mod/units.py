"""Siegel units, Weierstrass division values and cross-ratio units.

Indices live in (Z/N)^2.  A :class:`UnitExpr` is an exact product

    e^{2 pi i theta} * prod_x g_x^{e_x}

over ±-canonical indices x (so g_{-x} has been folded into g_x, with the
root of unity this costs recorded in theta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath
from mpmath import mp, mpc

from . import _fixed
from .mpfield import bernoulli_poly2, fmpf
from .qseries import QExpansion, to_fixed, work_bits

SIGMA = ((0, -1), (1, 0))
IDENTITY = ((1, 0), (0, 1))


# ---------------------------------------------------------------------------
# index helpers


def reduce_index(x, N):
    return (x[0] % N, x[1] % N)


def pm_canon(x, N):
    """Representative of {x, -x} in (Z/N)^2 (lexicographically smallest)."""
    a = (x[0] % N, x[1] % N)
    b = ((-x[0]) % N, (-x[1]) % N)
    return min(a, b)


def act(x, g, N):
    """Row vector times matrix, reduced mod N."""
    (a, b), (c, d) = g
    return ((x[0] * a + x[1] * c) % N, (x[0] * b + x[1] * d) % N)


def matmul(g, h):
    (a, b), (c, d) = g
    (e, f), (k, l) = h
    return ((a * e + b * k, a * f + b * l), (c * e + d * k, c * f + d * l))


def zeta_power(k, N):
    """zeta_N^k as an mpc."""
    k %= N
    return mpmath.expjpi(mpmath.mpf(2 * k) / N)


def root_of_unity(theta):
    """e^{2 pi i theta} for a Fraction theta."""
    theta = Fraction(theta) % 1
    return mpmath.expjpi(2 * fmpf(theta))


def floor_div(a, N):
    return a // N


# ---------------------------------------------------------------------------
# UnitExpr


@dataclass(frozen=True)
class UnitExpr:
    N: int
    exps: tuple  # sorted tuple of ((x1, x2), Fraction) with ±-canonical keys
    theta: Fraction = Fraction(0)
    modulus_only: bool = False

    @staticmethod
    def build(N, exps, theta=Fraction(0), modulus_only=False):
        """Canonicalize an iterable of (index, exponent) pairs."""
        acc = {}
        theta = Fraction(theta)
        for x, e in exps:
            e = Fraction(e)
            x = reduce_index(x, N)
            if x == (0, 0) or e == 0:
                continue
            key = pm_canon(x, N)
            if key != x and x[0] == 0:
                # g_{(0,-x2)} = -zeta^{-x2} g_{(0,x2)} with x = (0,-x2)
                theta += e * (Fraction(1, 2) - Fraction(-x[1] % N, N))
            acc[key] = acc.get(key, Fraction(0)) + e
        items = tuple(sorted((k, v) for k, v in acc.items() if v != 0))
        return UnitExpr(N, items, theta % 1, modulus_only)

    @staticmethod
    def siegel(x, N):
        return UnitExpr.build(N, [(x, 1)])

    def exp_map(self):
        return dict(self.exps)

    def __mul__(self, other):
        if self.N != other.N:
            raise ValueError("level mismatch")
        return UnitExpr.build(self.N, list(self.exps) + list(other.exps), self.theta + other.theta,
                              self.modulus_only or other.modulus_only)

    def __pow__(self, e):
        e = Fraction(e)
        return UnitExpr.build(self.N, [(x, v * e) for x, v in self.exps], self.theta * e, self.modulus_only)

    def __truediv__(self, other):
        return self * other ** -1

    def valuation(self):
        """Order at infinity in the parameter q^{1/N}."""
        return sum((e * self.N * bernoulli_poly2(Fraction(x[0], self.N)) / 2 for x, e in self.exps), Fraction(0))

    def slash(self, g):
        """v|g: indices act on the right; the constant is dropped."""
        return UnitExpr.build(self.N, [(act(x, g, self.N), e) for x, e in self.exps], 0, True)

    def is_trivial(self):
        return not self.exps

    def leading_value(self, t=1):
        """Value at infinity under zeta_N -> zeta_N^t (valuation must be 0)."""
        if self.valuation() != 0:
            raise ValueError("unit does not have a finite nonzero value at infinity")
        if self.modulus_only:
            raise ValueError("constant of a slashed UnitExpr is not tracked")
        N = self.N
        tt = t % N
        if tt % 2 == 0 or N % 2 == 0:
            tlift = tt if tt % 2 else tt + N
        else:
            tlift = tt
        val = root_of_unity(self.theta * tlift)
        for x, e in self.exps:
            if x[0] == 0:
                base = 1 - zeta_power(tt * x[1], N)
                if e.denominator == 1:
                    val *= base ** int(e)
                else:
                    val *= mpmath.power(base, fmpf(e))
        return val

    def q_expansion(self, K, bits=None):
        return unit_expansion(self, K, bits)

    def __str__(self):
        parts = []
        for x, e in self.exps:
            parts.append(f"g{x}^{e}")
        s = " * ".join(parts) or "1"
        if self.theta:
            s = f"e(2pi i {self.theta}) * " + s
        return s


# ---------------------------------------------------------------------------
# q-expansions of Siegel units and E_a


@lru_cache(maxsize=4096)
def _siegel_fixed(N, x1, x2, K, w):
    """Fixed-point coefficients of gamma_x (product part of g_x), 0 <= x1 < N."""
    one = 1 << w
    re = [one] + [0] * (K - 1)
    im = [0] * K
    rs = _fixed.rshift_round

    def factor(e, k):
        # multiply by (1 - zeta^k t^e), e >= 1
        z = zeta_power(k, N)
        cr, ci = to_fixed(z.real, w), to_fixed(z.imag, w)
        for i in range(K - 1, e - 1, -1):
            a, b = re[i - e], im[i - e]
            if a or b:
                re[i] -= rs(cr * a - ci * b, w)
                im[i] -= rs(cr * b + ci * a, w)

    const = None
    if x1 == 0:
        const = 1 - zeta_power(x2, N)
    e = x1 if x1 else N
    while e < K:
        factor(e, x2)
        e += N
    e = N - x1
    while e < K:
        factor(e, -x2)
        e += N
    return tuple(re), tuple(im), const


def siegel_expansion(x, N, K, lift=None, bits=None):
    """q-expansion of E_lift (or of g_x when lift is None) to K terms in q^{1/N}."""
    w = work_bits() if bits is None else bits
    if lift is None:
        lift = reduce_index(x, N)
    if reduce_index(lift, N) != reduce_index(x, N):
        raise ValueError("lift does not reduce to the index")
    x1, x2 = reduce_index(x, N)
    if (x1, x2) == (0, 0):
        raise ValueError("E_0 is not defined")
    re, im, const = _siegel_fixed(N, x1, x2, K, w)
    s = QExpansion(N, 0, re, im, K, bernoulli_poly2(Fraction(x1, N)) / 2, w)
    k = lift[0] // N
    c = mpc(1) if const is None else const
    if k:
        c *= (-zeta_power(-lift[1], N)) ** k
    return s.scale(c) if c != 1 else s


def _fold_mu(s):
    """Absorb q^mu into the valuation when mu is a multiple of 1/N."""
    m = s.mu * s.N
    if m.denominator != 1 or s.mu == 0:
        return s
    m = int(m)
    return QExpansion(s.N, s.val + m, s.re, s.im, s.order + m, 0, s.bits)


def unit_expansion(v, K, bits=None):
    """q-expansion of a UnitExpr with K terms of relative precision."""
    if v.modulus_only:
        raise ValueError("slashed UnitExpr has no tracked constant; expand |v| instead")
    w = work_bits() if bits is None else bits
    num = None
    den = None
    for x, e in v.exps:
        g = siegel_expansion(x, v.N, K, bits=w)
        if e.denominator == 1:
            n = abs(int(e))
            p = g
            for _ in range(n - 1):
                p = p * g
            if e > 0:
                num = p if num is None else num * p
            else:
                den = p if den is None else den * p
        else:
            p = g.pow_rational(e)
            num = p if num is None else num * p
    if num is None:
        num = QExpansion.constant(1, v.N, K, w)
    if den is not None:
        num = num / den
    out = num.scale(root_of_unity(v.theta)) if v.theta else num
    return _fold_mu(out)


# ---------------------------------------------------------------------------
# Cross-ratio units


@dataclass(frozen=True)
class CrossRatioUnit:
    N: int
    quad: tuple  # four ±-canonical indices

    @staticmethod
    def make(quad, N):
        q = tuple(pm_canon(x, N) for x in quad)
        if len(set(q)) != 4:
            raise ValueError(f"quadruple {quad} is not distinct mod ±1")
        return CrossRatioUnit(N, q)

    def slash(self, g):
        return CrossRatioUnit.make([act(x, g, self.N) for x in self.quad], self.N)

    def complement(self):
        """1 - u(a,b,c,d) = u(a,c,b,d)."""
        a, b, c, d = self.quad
        return CrossRatioUnit(self.N, (a, c, b, d))

    def as_units(self):
        return _cr_units(self.quad, self.N)


def is_distinct(quad, N):
    return len({pm_canon(x, N) for x in quad}) == 4


def cross_ratio_as_units(quad, N, lifts=None):
    """Exact UnitExpr of u(a,b,c,d) = E_{c+a}E_{c-a}E_{d+b}E_{d-b}/(E_{c+b}E_{c-b}E_{d+a}E_{d-a})."""
    if not is_distinct(quad, N):
        raise ValueError("cross ratio needs four distinct ±-classes")
    if lifts is None:
        lifts = [reduce_index(x, N) for x in quad]
    for x, l in zip(quad, lifts):
        if reduce_index(l, N) not in (reduce_index(x, N), reduce_index((-x[0], -x[1]), N)):
            raise ValueError("lift does not represent the class")
    a, b, c, d = lifts

    def add(x, y, s):
        return (x[0] + s * y[0], x[1] + s * y[1])

    top = [add(c, a, 1), add(c, a, -1), add(d, b, 1), add(d, b, -1)]
    bot = [add(c, b, 1), add(c, b, -1), add(d, a, 1), add(d, a, -1)]
    theta = Fraction(0)
    exps = []
    for y, s in [(y, 1) for y in top] + [(y, -1) for y in bot]:
        k = y[0] // N
        # E_y = (-zeta^{-y2})^k g_{ybar}
        theta += s * k * (Fraction(1, 2) - Fraction(y[1], N))
        exps.append((y, s))
    return UnitExpr.build(N, exps, theta)


@lru_cache(maxsize=100000)
def _cr_units(quad, N):
    return cross_ratio_as_units(quad, N)


def cross_ratio_expansion(u, K, bits=None):
    return unit_expansion(u.as_units(), K, bits)


# ---------------------------------------------------------------------------
# Weierstrass division values (oracle)


def wp_expansion(a, N, K, bits=None):
    """q-expansion of wp_a(tau) = wp(tau, (a1 tau + a2)/N) in q^{1/N}."""
    a1, a2 = reduce_index(a, N)
    if (a1, a2) == (0, 0):
        raise ValueError("wp_0 is infinite")
    w = work_bits() if bits is None else bits
    coeffs = [mpc(0)] * K
    coeffs[0] += mpmath.mpf(1) / 12

    def geom(e0, k, step):
        # sum_{n} sum_{m>=1} m (t^{e0 + n*step} zeta^k)^m
        e = e0
        while e < K:
            m = 1
            while m * e < K:
                coeffs[m * e] += m * zeta_power(m * k, N)
                m += 1
            e += step

    if a1 == 0:
        z = zeta_power(a2, N)
        coeffs[0] += z / (1 - z) ** 2
        geom(N, a2, N)
    else:
        geom(a1, a2, N)
    geom(N - a1, -a2, N)
    n = N
    while n < K:
        m = 1
        while m * n < K:
            coeffs[m * n] -= 2 * m
            m += 1
        n += N
    s = QExpansion.from_coeffs(N, coeffs, K, bits=w)
    return s.scale((2j * mp.pi) ** 2)


def wp_cross_ratio(quad, N, K, bits=None):
    """[wp_a, wp_b, wp_c, wp_d] with wp_0 = infinity, as a q-expansion."""
    a, b, c, d = [reduce_index(x, N) for x in quad]
    P = {}
    for x in (a, b, c, d):
        if x != (0, 0):
            P[x] = wp_expansion(x, N, K, bits)
    if a == (0, 0):
        return (P[d] - P[b]) / (P[c] - P[b])
    if b == (0, 0):
        return (P[c] - P[a]) / (P[d] - P[a])
    if c == (0, 0):
        return (P[d] - P[b]) / (P[d] - P[a])
    if d == (0, 0):
        return (P[c] - P[a]) / (P[c] - P[b])
    return ((P[c] - P[a]) / (P[c] - P[b])) / ((P[d] - P[a]) / (P[d] - P[b]))


# ---------------------------------------------------------------------------
# Cusps


def _lift_column(a, c, N):
    """A matrix in SL2(Z) whose first column is congruent to (a, c) mod N."""
    a %= N
    c %= N
    if math.gcd(math.gcd(a, c), N) != 1:
        raise ValueError("(a, c) must have order N")
    cc = c if c else N
    aa = a
    while math.gcd(aa, cc) != 1:
        aa += N
    g, x, y = _egcd(aa, cc)
    # aa*x + cc*y = 1  ->  [[aa, -y], [cc, x]]
    return ((aa, -y), (cc, x))


def _egcd(a, b):
    if b == 0:
        return (a, 1, 0)
    g, x, y = _egcd(b, a % b)
    return (g, y, x - (a // b) * y)


def gamma_n_cusps(N):
    """Gamma(N) cusps as ±-classes of first columns (a, c) of order N."""
    seen = set()
    out = []
    for c in range(N):
        for a in range(N):
            if math.gcd(math.gcd(a, c), N) != 1:
                continue
            key = pm_canon((a, c), N)
            if key in seen:
                continue
            seen.add(key)
            out.append(key)
    return out


def gamma1_cusp_key(a, c, N):
    g = math.gcd(c, N)
    k1 = (c % N, a % g)
    k2 = ((-c) % N, (-a) % g)
    return min(k1, k2)


@dataclass(frozen=True)
class Cusp:
    a: int
    c: int
    width: int
    matrix: tuple

    def repr(self):
        return f"{self.a}/{self.c}"


def gamma1_cusps(N):
    """Representatives of the cusps of X_1(N) as fractions a/c, with widths."""
    seen = {}
    for c in range(N):
        for a in range(N):
            if math.gcd(math.gcd(a, c), N) != 1:
                continue
            key = gamma1_cusp_key(a, c, N)
            if key in seen:
                continue
            g = _lift_column(a, c, N)
            seen[key] = Cusp(g[0][0], g[1][0], N // math.gcd(c, N), g)
    return list(seen.values())


def order_q1n(v, g):
    """Order of v|g at infinity in q^{1/N}."""
    N = v.N
    tot = Fraction(0)
    for x, e in v.exps:
        y1 = (x[0] * g[0][0] + x[1] * g[1][0]) % N
        tot += e * N * bernoulli_poly2(Fraction(y1, N)) / 2
    return tot


def order_at_cusps(v, level="gamma1"):
    """Orders of a unit at the cusps, in local parameters.

    For ``level="gamma1"`` the unit must be a Gamma_1(N) unit; the order at a
    cusp of width w is (w/N) times the order of v|g in q^{1/N}.
    """
    N = v.N
    out = []
    if level == "gamma1":
        for cusp in gamma1_cusps(N):
            o = order_q1n(v, cusp.matrix) * cusp.width / N
            out.append({"repr": cusp.repr(), "width": cusp.width, "order": o, "matrix": cusp.matrix})
    elif level == "gamma":
        for a, c in gamma_n_cusps(N):
            g = _lift_column(a, c, N)
            out.append({"repr": f"{a}/{c} mod {N}", "width": N, "order": order_q1n(v, g), "matrix": g})
    else:
        raise ValueError("level must be 'gamma1' or 'gamma'")
    return out


def degree(v, level="gamma1"):
    return sum((max(Fraction(0), c["order"]) for c in order_at_cusps(v, level)), Fraction(0))


def u1(a, b, c, d, N):
    """u_1(a,b,c,d) = u((0,a),(0,b),(0,c),(0,d)) as a CrossRatioUnit."""
    return CrossRatioUnit.make([(0, a), (0, b), (0, c), (0, d)], N)


# ---------------------------------------------------------------------------
# Cusp values


ZERO = "0"
INFINITY = "oo"


@lru_cache(maxsize=200000)
def cusp_value(u, g=IDENTITY, t=1):
    """Value of u|g at infinity under zeta_N -> zeta_N^t, or a 0/oo marker."""
    w = u.slash(g)
    v = w.as_units()
    val = v.valuation()
    if val > 0:
        return ZERO
    if val < 0:
        return INFINITY
    if w.complement().as_units().valuation() > 0:
        return mpc(1)
    return v.leading_value(t)


def units_group(N):
    return [t for t in range(1, N) if math.gcd(t, N) == 1] or [1]


def mason_bound(genus, s):
    """Upper bound 2g - 2 + s for the degree of a non-constant S-unit solution."""
    if s < 1:
        raise ValueError("need at least one point in S")
    return 2 * genus - 2 + s

"""L-values at s = -1: elliptic curves and products of weight-1 Eisenstein series."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources

import mpmath
from mpmath import mp, mpf

from . import _fixed
from .classp import ClassPFun
from .mpfield import fmpf, incomplete_gamma
from .qseries import to_fixed, truncation_order, work_bits


# ---------------------------------------------------------------------------
# elliptic curves


def _primes_upto(n):
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for p in range(2, int(n ** 0.5) + 1):
        if sieve[p]:
            sieve[p * p::p] = bytearray(len(sieve[p * p::p]))
    return [i for i in range(n + 1) if sieve[i]]


def _prime_factors(n):
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


@dataclass
class EllipticCurveQ:
    label: str
    conductor: int
    ainvs: tuple
    _ap: dict = field(default_factory=dict, repr=False)

    @property
    def b_invariants(self):
        a1, a2, a3, a4, a6 = self.ainvs
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8

    @property
    def discriminant(self):
        b2, b4, b6, b8 = self.b_invariants
        return -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    @property
    def c4(self):
        b2, b4, _, _ = self.b_invariants
        return b2 * b2 - 24 * b4

    @property
    def c6(self):
        b2, b4, b6, _ = self.b_invariants
        return -b2 ** 3 + 36 * b2 * b4 - 216 * b6

    def minimality_certified(self, p):
        """True when v_p(D) < 12, v_p(c4) < 4 or v_p(c6) < 6 (sufficient for minimality at p)."""
        D = self.discriminant
        k = 0
        while D % p == 0:
            D //= p
            k += 1
        return k < 12 or self.c4 % p ** 4 != 0 or self.c6 % p ** 6 != 0

    def affine_points(self, p):
        a1, a2, a3, a4, a6 = self.ainvs
        if p == 2:
            return sum(1 for x in range(2) for y in range(2)
                       if (y * y + a1 * x * y + a3 * y - x ** 3 - a2 * x * x - a4 * x - a6) % 2 == 0)
        b2, b4, b6, _ = self.b_invariants
        # (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6
        roots = [0] * p
        for y in range(p):
            roots[y * y % p] += 1
        return sum(roots[(4 * x ** 3 + b2 * x * x + 2 * b4 * x + b6) % p] for x in range(p))

    def ap(self, p):
        r = self._ap.get(p)
        if r is None:
            r = p - self.affine_points(p)
            self._ap[p] = r
        return r

    def an_list(self, M):
        """[a_0 = 0, a_1, ..., a_M]."""
        a = [0] * (M + 1)
        if M >= 1:
            a[1] = 1
        for p in _primes_upto(M):
            ap = self.ap(p)
            good = self.conductor % p != 0
            pk = p
            prev, cur = 1, ap
            while pk <= M:
                a[pk] = cur
                prev, cur = cur, ap * cur - (p * prev if good else 0)
                pk *= p
        # multiplicative closure
        spf = list(range(M + 1))
        for p in _primes_upto(int(M ** 0.5) + 1):
            for m in range(p * p, M + 1, p):
                if spf[m] == m:
                    spf[m] = p
        for n in range(2, M + 1):
            p = spf[n]
            m = n
            while m % p == 0:
                m //= p
            if m > 1:
                a[n] = a[n // m] * a[m]
        return a


@lru_cache(maxsize=1)
def curve_table():
    out = {}
    text = resources.files("k4mod").joinpath("data/curves.txt").read_text()
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        out[parts[0]] = (int(parts[1]), tuple(int(x) for x in parts[2:7]))
    return out


def elliptic_curve(label):
    tab = curve_table()
    if label not in tab:
        # allow a class label such as "11a"
        cands = [k for k in tab if k.rstrip("0123456789") == label]
        if not cands:
            raise KeyError(f"curve {label!r} is not in the built-in table (conductor <= 50)")
        label = sorted(cands)[0]
    N, ainvs = tab[label]
    return EllipticCurveQ(label, N, ainvs)


def curves_of_conductor(N):
    return [elliptic_curve(k) for k, (n, _) in sorted(curve_table().items()) if n == N and k.endswith("1")]


def eigenvalue_system(E, pmax=30):
    return {p: E.ap(p) for p in _primes_upto(pmax)}


# completed L-function of a weight-2 newform of level N


def _lambda_split(an, N, s, eps, t):
    """Lambda(s) = sum a_n [A^s G(s, x t) + eps A^(2-s) G(2-s, x/t)], A = sqrt(N)/(2 pi n)."""
    sq = mpmath.sqrt(N)
    tot = mpf(0)
    tol = mpf(2) ** (-mp.prec - 8)
    for n in range(1, len(an)):
        if not an[n]:
            continue
        x = 2 * mp.pi * n / sq
        A = 1 / x
        term = A ** s * incomplete_gamma(s, x * t) + eps * A ** (2 - s) * incomplete_gamma(2 - s, x / t)
        tot += an[n] * term
        if abs(term) * n < tol and n > 10:
            break
    return tot


def _terms_needed(N, digits, t):
    m = min(t, 1 / t)
    return int(math.sqrt(N) * (digits + 10) * math.log(10) / (2 * math.pi * m)) + 10


@dataclass
class EllipticLData:
    root_number: int
    lambda3: object
    L3: object
    lprime_minus1: object
    eps_defect: object


def elliptic_l_data(E, digits=None):
    """Root number (chosen numerically), Lambda(3), L(E,3) and L'(E,-1)."""
    digits = digits or int(mp.dps)
    N = E.conductor
    t1, t2 = mpf(1), mpf(6) / 5
    an = E.an_list(_terms_needed(N, digits, t2))
    best = None
    for eps in (1, -1):
        v1 = _lambda_split(an, N, 3, eps, t1)
        v2 = _lambda_split(an, N, 3, eps, t2)
        d = abs(v1 - v2)
        if best is None or d < best[1]:
            best = (eps, d, v1, abs(v1) + 1)
    eps, defect, lam3, _ = best
    if defect > mpf(10) ** (-(digits - 5)) * (abs(lam3) + 1):
        raise ArithmeticError("functional equation not satisfied for either sign")
    L3 = lam3 * (2 * mp.pi) ** 3 / (N ** mpf(1.5) * 2)
    lp = -eps * N * N * L3 / (8 * mp.pi ** 4)
    return EllipticLData(eps, lam3, L3, lp, defect)


def l_value_3(E, digits=None):
    return elliptic_l_data(E, digits).L3


def lprime_minus1_elliptic(E, digits=None):
    """L'(E, -1) = -eps N^2 L(E, 3) / (8 pi^4)."""
    if isinstance(E, str):
        E = elliptic_curve(E)
    return elliptic_l_data(E, digits).lprime_minus1


# ---------------------------------------------------------------------------
# Eisenstein series


def eisenstein_coefficients(x, N, K):
    """Exact coefficients (q^0 .. q^{K-1}) of s~_x for x != 0 mod N."""
    x %= N
    if x == 0:
        raise ValueError("x must be nonzero mod N")
    c = [Fraction(0)] * K
    c[0] = Fraction(1, 2) - Fraction(x, N)
    for n in range(1, K):
        r = n % N
        s = (1 if r == x else 0) - (1 if r == (-x) % N else 0)
        if s:
            for m in range(n, K, n):
                c[m] += s
    return c


def eisenstein_expansion(x, N, K):
    """s~_x as a QExpansion in q^{1/N} (nonzero only at multiples of N)."""
    from .qseries import QExpansion

    c = eisenstein_coefficients(x, N, (K + N - 1) // N)
    full = [Fraction(0)] * K
    for k, v in enumerate(c):
        if k * N < K:
            full[k * N] = v
    return QExpansion.from_coeffs(N, full, K)


def eisenstein_product_coefficients(a, b, N, K):
    ca = eisenstein_coefficients(a, N, K)
    cb = eisenstein_coefficients(b, N, K)
    return [sum((ca[i] * cb[k - i] for i in range(k + 1)), Fraction(0)) for k in range(K)]


def _fricke_series(x, N, K, w):
    """Fixed-point coefficients of (1/2) cot(pi x/N) + 2 sum_k (sum_{m | k} sin(2 pi x m/N)) t^k."""
    with mp.workprec(w + 16):
        sins = [mpmath.sin(2 * mp.pi * x * m / N) for m in range(N)]
        out = [0] * K
        out[0] = to_fixed(mpmath.cot(mp.pi * x / N) / 2, w)
        acc = [mpf(0)] * K
        for m in range(1, K):
            s = sins[m % N]
            for k in range(m, K, m):
                acc[k] += s
        for k in range(1, K):
            out[k] = to_fixed(2 * acc[k], w)
    return out


def eisenstein_product_function(a, b, N, K=None, digits=None, bits=None):
    """f(iy) for f = s~_a s~_b as a class-P function.

    The 0-side uses f(i/y) = y^2 A_a(iy/N) A_b(iy/N) / N^2 with
    A_x(tau) = (1/2) cot(pi x/N) + 2 sum_k (sum_{m | k} sin(2 pi x m/N)) q^k.
    """
    w = work_bits() if bits is None else bits
    if K is None:
        K = truncation_order(N, digits or int(mp.dps))
    nq = (K + N - 1) // N
    c = eisenstein_product_coefficients(a, b, N, nq)
    inf = [0] * K
    for k, v in enumerate(c):
        if k * N < K:
            inf[k * N] = to_fixed(v, w)
    Aa = _fricke_series(a, N, K, w)
    Ab = _fricke_series(b, N, K, w)
    prod = [_fixed.rshift_round(v, w) for v in _fixed.conv_raw(Aa, Ab, K)]
    zero = [_fixed._div_round(v, N * N) for v in prod]
    return ClassPFun(N, K, {0: inf}, {2: zero}, w)


def eisenstein_l_value(a, b, N, s, K=None, digits=None):
    """L(s~_a s~_b, s) = (2 pi)^s M(phi, s) / Gamma(s) (s not a pole)."""
    phi = eisenstein_product_function(a, b, N, K, digits)
    return (2 * mp.pi) ** s * phi.mellin_s(s) / mpmath.gamma(s)


def lprime_minus1_eisenstein(a, b, N, K=None, digits=None):
    """L'(s~_a s~_b, -1) = -M(phi, -1) / (2 pi)."""
    if a % N == 0 or b % N == 0:
        raise ValueError("a and b must be nonzero mod N")
    phi = eisenstein_product_function(a, b, N, K, digits)
    return -phi.mellin_s(-1) / (2 * mp.pi)


def eisenstein_target(a, b, N, digits=None):
    """-(6 pi^2 / N) L'(s~_a s~_b, -1)."""
    return -6 * mp.pi ** 2 / N * lprime_minus1_eisenstein(a, b, N, digits=digits)


# ---------------------------------------------------------------------------
# Mahler measure of (1 + x)(1 + y) + z


def mahler_measure_boyd():
    """m((1+x)(1+y)+z) by Jensen's formula in z and a Clausen closed form in y.

    For fixed theta with c = 4 cos(theta/2) >= 1 the y-integral of
    log+ |c cos(phi/2)| equals 2 phi0 log(c/2) + 2 Cl_2(pi - phi0) with
    phi0 = 2 arccos(1/c); the theta-integral runs over [0, 2 arccos(1/4)].
    """
    theta0 = 2 * mpmath.acos(mpf(1) / 4)

    def inner(th):
        c = 4 * mpmath.cos(th / 2)
        if c <= 1:
            return mpf(0)
        p0 = 2 * mpmath.acos(1 / c)
        return 2 * p0 * mpmath.log(c / 2) + 2 * mpmath.clsin(2, mp.pi - p0)

    return mpmath.quad(inner, [0, theta0 / 2, theta0]) / (2 * mp.pi ** 2)

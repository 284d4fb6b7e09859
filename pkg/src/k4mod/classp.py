"""Class-P functions on (0, oo) and their generalized Mellin transform.

A function of class P has two expansions

    phi(y)   = sum_j y^j sum_n a_n^(j) exp(-2 pi n y / N)     (y -> oo)
    phi(1/y) = sum_j y^j sum_n b_n^(j) exp(-2 pi n y / N)     (y -> oo)

Coefficients are real and stored as fixed-point integers (scale 2**bits),
one list of K entries (n = 0 .. K-1) per power j.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import mpmath
from mpmath import mp, mpf

from . import _fixed
from .mpfield import fmpf, incomplete_gamma
from .qseries import from_fixed, to_fixed, work_bits

J_CAP = 8
SLACK_BITS = 48


class NoPrimitiveError(ValueError):
    pass


class NotIntegrableError(ValueError):
    pass


class MellinPoleError(ValueError):
    pass


@lru_cache(maxsize=64)
def _lambda_fixed(N, w):
    """2 pi / N at scale 2**w."""
    with mp.workprec(w + 16):
        return to_fixed(2 * mp.pi / N, w)


@lru_cache(maxsize=64)
def _inv_lambda_powers(N, K, jmax, w):
    """[(N / 2 pi n)^k for k = 1..jmax+1] at scale 2**w, for n = 1..K-1."""
    out = [None]
    with mp.workprec(w + 32):
        for n in range(1, K):
            r = N / (2 * mp.pi * n)
            out.append([to_fixed(r ** k, w) for k in range(1, jmax + 2)])
    return out


@lru_cache(maxsize=64)
def _mellin_weights(N, K, jinf, jzero, w):
    """Fixed-point weights for the s = 1 Mellin sum."""
    winf = {}
    wzero = {}
    with mp.workprec(w + 32):
        for n in range(1, K):
            lam = 2 * mp.pi * n / N
            r = 1 / lam
            for j in range(jinf + 1):
                winf[(n, j)] = to_fixed(r ** (j + 1) * incomplete_gamma(j + 1, lam), w)
            for j in range(jzero + 1):
                wzero[(n, j)] = to_fixed(r ** (j - 1) * incomplete_gamma(j - 1, lam), w)
    return winf, wzero


def _zero_list(K):
    return [0] * K


class ClassPFun:
    __slots__ = ("N", "K", "bits", "inf", "zero")

    def __init__(self, N, K, inf=None, zero=None, bits=None):
        self.N = N
        self.K = K
        self.bits = work_bits() if bits is None else bits
        self.inf = {j: list(v) for j, v in (inf or {}).items() if any(v)}
        self.zero = {j: list(v) for j, v in (zero or {}).items() if any(v)}
        for side in (self.inf, self.zero):
            for j, v in side.items():
                if j < 0 or j > J_CAP:
                    raise ValueError(f"power y^{j} outside the supported range 0..{J_CAP}")
                if len(v) != K:
                    raise ValueError("coefficient list has the wrong length")

    # -- construction ----------------------------------------------------------

    @classmethod
    def from_coeffs(cls, N, K, inf=None, zero=None, bits=None):
        """Build from dicts j -> list of real numbers (mpf, int, Fraction)."""
        w = work_bits() if bits is None else bits

        def conv(side):
            out = {}
            for j, vals in (side or {}).items():
                lst = [to_fixed(v if isinstance(v, (int, Fraction)) else mpf(v), w) for v in list(vals)[:K]]
                lst.extend([0] * (K - len(lst)))
                out[j] = lst
            return out

        return cls(N, K, conv(inf), conv(zero), w)

    @classmethod
    def constant(cls, c, N, K, bits=None):
        return cls.from_coeffs(N, K, {0: [c]}, {0: [c]}, bits)

    def _new(self, inf, zero):
        return ClassPFun(self.N, self.K, inf, zero, self.bits)

    def _check(self, other):
        if not isinstance(other, ClassPFun):
            raise TypeError("expected a ClassPFun")
        if (self.N, self.K, self.bits) != (other.N, other.K, other.bits):
            raise ValueError("class-P operands differ in level, length or precision")

    def jmax(self):
        return max(self.inf.keys() | {0}), max(self.zero.keys() | {0})

    # -- linear structure --------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, ClassPFun):
            return self + ClassPFun.constant(other, self.N, self.K, self.bits)
        self._check(other)
        out = []
        for a, b in ((self.inf, other.inf), (self.zero, other.zero)):
            d = {j: list(v) for j, v in a.items()}
            for j, v in b.items():
                if j in d:
                    d[j] = [x + y for x, y in zip(d[j], v)]
                else:
                    d[j] = list(v)
            out.append(d)
        return self._new(*out)

    __radd__ = __add__

    def __neg__(self):
        return self._new({j: [-x for x in v] for j, v in self.inf.items()},
                         {j: [-x for x in v] for j, v in self.zero.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        w = self.bits
        if isinstance(c, int):
            f = lambda v: [x * c for x in v]
        elif isinstance(c, Fraction):
            f = lambda v: [_fixed._div_round(x * c.numerator, c.denominator) for x in v]
        else:
            cf = to_fixed(mpf(c), w)
            f = lambda v: [_fixed.rshift_round(x * cf, w) for x in v]
        return self._new({j: f(v) for j, v in self.inf.items()}, {j: f(v) for j, v in self.zero.items()})

    def __mul__(self, other):
        if not isinstance(other, ClassPFun):
            return self.scale(other)
        self._check(other)
        K, w = self.K, self.bits
        out = []
        for a, b in ((self.inf, other.inf), (self.zero, other.zero)):
            d = {}
            for j1, v1 in a.items():
                for j2, v2 in b.items():
                    raw = _fixed.conv_raw(v1, v2, K)
                    j = j1 + j2
                    if j in d:
                        d[j] = [x + y for x, y in zip(d[j], raw)]
                    else:
                        d[j] = raw
            out.append({j: [_fixed.rshift_round(x, w) for x in v] for j, v in d.items()})
        return self._new(*out)

    __rmul__ = __mul__

    def power(self, k):
        out = ClassPFun.constant(1, self.N, self.K, self.bits)
        for _ in range(k):
            out = out * self
        return out

    # -- calculus -----------------------------------------------------------------

    def _ddy_side(self, side):
        """d/dy of sum_j y^j sum_n c_n e^{-lambda_n y}."""
        w = self.bits
        L = _lambda_fixed(self.N, w)
        d = {}
        for j, v in side.items():
            lv = [_fixed.rshift_round(n * L * x, w) for n, x in enumerate(v)]
            d[j] = [a - b for a, b in zip(d.get(j, _zero_list(self.K)), lv)]
            if j >= 1:
                d[j - 1] = [a + j * b for a, b in zip(d.get(j - 1, _zero_list(self.K)), v)]
        return d

    def differentiate(self):
        inf = self._ddy_side(self.inf)
        dz = self._ddy_side(self.zero)
        zero = {j + 2: [-x for x in v] for j, v in dz.items()}
        return self._new(inf, zero)

    def _integrate_side(self, side):
        """Termwise primitive of sum_j y^j sum_n c_n e^{-lambda_n y} (zero constant)."""
        K, w = self.K, self.bits
        jm = max(side.keys() | {0})
        inv = _inv_lambda_powers(self.N, K, jm, w)
        d = {}

        def acc(j, n, x):
            if j not in d:
                d[j] = _zero_list(K)
            d[j][n] += x

        for j, v in side.items():
            if v[0]:
                acc(j + 1, 0, _fixed._div_round(v[0], j + 1))
            fj = math.factorial(j)
            for n in range(1, K):
                c = v[n]
                if not c:
                    continue
                # -e^{-lam y} sum_i j!/i! y^i lam^{-(j-i+1)}
                for i in range(j + 1):
                    coef = fj // math.factorial(i)
                    acc(i, n, -_fixed.rshift_round(coef * c * inv[n][j - i], w))
        return d

    def primitive(self, const_inf=0, const_zero=None):
        """A primitive in P; the 0-side constant defaults to continuity at y = 1."""
        for j in (0, 1):
            v = self.zero.get(j)
            if v:
                for n, x in enumerate(v):
                    if x:
                        raise NoPrimitiveError(f"no primitive in P: b_{n}^({j}) is nonzero")
        inf = self._integrate_side(self.inf)
        # Psi'(y) = -y^{-2} psi(y)
        shifted = {j - 2: [-x for x in v] for j, v in self.zero.items()}
        zero = self._integrate_side(shifted)
        out = self._new(inf, zero)
        w = self.bits
        ci = to_fixed(mpf(const_inf) if not isinstance(const_inf, (int, Fraction)) else const_inf, w)
        out = out._add_const(ci, 0)
        if const_zero is None:
            gap = out.eval_inf(1) - out.eval_zero(1)
            cz = to_fixed(gap, w)
        else:
            cz = to_fixed(mpf(const_zero) if not isinstance(const_zero, (int, Fraction)) else const_zero, w)
        return out._add_const(0, cz)

    def _add_const(self, ci, cz):
        inf = {j: list(v) for j, v in self.inf.items()}
        zero = {j: list(v) for j, v in self.zero.items()}
        for side, c in ((inf, ci), (zero, cz)):
            if c:
                side.setdefault(0, _zero_list(self.K))
                side[0][0] += c
        return self._new(inf, zero)

    # -- evaluation -----------------------------------------------------------------

    def _eval_side(self, side, y):
        y = mpf(y)
        if not side:
            return mpf(0)
        t = mpmath.exp(-2 * mp.pi * y / self.N)
        total = mpf(0)
        w = self.bits
        for j, v in side.items():
            s = mpf(0)
            for x in reversed(v):
                s = s * t + from_fixed(x, w) if x else s * t
            total += y ** j * s
        return total

    def eval_inf(self, y):
        return self._eval_side(self.inf, y)

    def eval_zero(self, y):
        """phi(1/y) from the expansion at 0."""
        return self._eval_side(self.zero, y)

    def __call__(self, y):
        y = mpf(y)
        return self.eval_inf(y) if y >= 1 else self.eval_zero(1 / y)

    def seam_residual(self):
        return abs(self.eval_inf(1) - self.eval_zero(1))

    def constant_terms(self):
        """{('inf'|'zero', j): a_0 or b_0} as mpf."""
        out = {}
        for name, side in (("inf", self.inf), ("zero", self.zero)):
            for j, v in side.items():
                if v[0]:
                    out[(name, j)] = from_fixed(v[0], self.bits)
        return out

    # -- Mellin transform ------------------------------------------------------------

    def _small(self, x):
        return abs(x) < (1 << SLACK_BITS)

    def integrability_defects(self):
        bad = []
        for j, v in self.inf.items():
            if not self._small(v[0]):
                bad.append(("inf", j))
        for j, v in self.zero.items():
            if j >= 1 and not self._small(v[0]):
                bad.append(("zero", j))
        return bad

    def is_integrable(self):
        return not self.integrability_defects()

    def mellin_value(self, with_bound=False):
        """Integral over (0, oo) through the incomplete-gamma series."""
        bad = self.integrability_defects()
        if bad:
            raise NotIntegrableError(f"non-integrable: nonzero constant terms {bad}")
        K, w = self.K, self.bits
        ji, jz = self.jmax()
        winf, wzero = _mellin_weights(self.N, K, ji, jz, w)
        tot = 0
        for j, v in self.inf.items():
            for n in range(1, K):
                if v[n]:
                    tot += v[n] * winf[(n, j)]
        for j, v in self.zero.items():
            for n in range(1, K):
                if v[n]:
                    tot += v[n] * wzero[(n, j)]
        val = from_fixed(_fixed.rshift_round(tot, w), w)
        if 0 in self.zero:
            val += from_fixed(self.zero[0][0], w)
        if with_bound:
            return val, self.tail_bound()
        return val

    def tail_bound(self):
        """Heuristic bound for the Mellin tail beyond n = K - 1."""
        K = self.K
        lo = max(1, K - max(2, K // 10))
        env = 0
        for side in (self.inf, self.zero):
            for v in side.values():
                env = max(env, max(abs(x) for x in v[lo:K]) if K > lo else 0)
        if not env:
            return mpf(0)
        env = from_fixed(env, self.bits)
        lam = 2 * mp.pi / self.N
        jm = max(self.jmax())
        x = lam * K
        # weights behave like lam^-1 n^-1 (j+1)! e^{-lam n} near the tail
        r = mpmath.exp(-lam)
        return 100 * env * mpf(K) ** 2 * mpmath.factorial(jm + 1) * mpmath.exp(-x) / (lam * (1 - r))

    def mellin_s(self, s):
        """Analytically continued M(phi, s) = int_0^oo phi(y) y^{s-1} dy."""
        s = mpmath.mpmathify(s)
        K, w = self.K, self.bits
        total = mpf(0)
        for j, v in self.inf.items():
            if v[0] and not self._small(v[0]):
                if s + j == 0:
                    raise MellinPoleError(f"pole at s = {-j} from a_0^({j})")
                total -= from_fixed(v[0], w) / (j + s)
        for j, v in self.zero.items():
            if v[0] and not self._small(v[0]):
                if s - j == 0:
                    raise MellinPoleError(f"pole at s = {j} from b_0^({j})")
                total += from_fixed(v[0], w) / (s - j)
        for sign, side in ((1, self.inf), (-1, self.zero)):
            for j, v in side.items():
                z = j + sign * s
                for n in range(1, K):
                    if not v[n]:
                        continue
                    lam = 2 * mp.pi * n / self.N
                    total += from_fixed(v[n], w) * lam ** (-z) * _gamma_upper(z, lam)
        return total

    def mellin_s_derivative(self, s):
        """d/ds M(phi, s) by a central difference with step 2^(-P/3)."""
        p = mp.prec
        with mp.workprec(p + p // 3 + 32):
            h = mpf(2) ** (-(p // 3))
            s = mpmath.mpmathify(s)
            d = (self.mellin_s(s + h) - self.mellin_s(s - h)) / (2 * h)
        return +d

    def to_json(self):
        w = self.bits

        def dump(side):
            return {str(j): [mpmath.nstr(from_fixed(x, w), 30) for x in v] for j, v in side.items()}

        return {"N": self.N, "K": self.K, "inf": dump(self.inf), "zero": dump(self.zero)}


def _gamma_upper(z, x):
    if mpmath.isint(z) and z >= -1:
        return incomplete_gamma(int(z), x)
    return mpmath.gammainc(z, x)


def from_exponential(N, K, n, j=0, coeff=1, side="inf", bits=None):
    """Single term coeff * y^j * exp(-2 pi n y / N) on one side."""
    vals = [0] * K
    vals[n] = coeff
    if side == "inf":
        return ClassPFun.from_coeffs(N, K, {j: vals}, None, bits)
    return ClassPFun.from_coeffs(N, K, None, {j: vals}, bits)

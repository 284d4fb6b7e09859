"""Regulator 1-forms along the geodesic from 0 to i*oo as class-P functions.

Along tau = iy write t = exp(-2 pi y / N).  For a Siegel unit g_x
(0 <= x1 < N)

    log g_x(tau) = 2 pi i tau B2(x1/N)/2 + [log(1 - zeta^x2) if x1 = 0]
                   + sum_k c_k t^k,
    c_k = -sum_{e | k, e = x1 mod N} zeta^{x2 k/e} e/k
          -sum_{e | k, e = -x1 mod N} zeta^{-x2 k/e} e/k,

so log|g_x|, d arg g_x and everything built from them are class-P
functions.  The expansion at 0 of f(iy) is the expansion at oo of f|sigma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath
from mpmath import mp, mpf, mpc

from . import _fixed, units
from .classp import ClassPFun
from .mpfield import bloch_wigner, fmpf, zagier_p
from .qseries import from_fixed, to_fixed, truncation_order, work_bits
from .units import IDENTITY, SIGMA, CrossRatioUnit, UnitExpr, matmul
from .wedge import ExpVector

MAX_WEIGHT = 5


# ---------------------------------------------------------------------------
# Siegel logarithms


@lru_cache(maxsize=20000)
def _siegel_log(N, x1, x2, K, w):
    """(B2 slope, constant log|1 - zeta^x2| or 0, Re c_k list, Im c_k list)."""
    from .mpfield import bernoulli_poly2

    b2 = bernoulli_poly2(Fraction(x1, N))
    re = [0] * K
    im = [0] * K
    with mp.workprec(w + 16):
        zetas = [units.zeta_power(j, N) for j in range(N)]
        for k in range(1, K):
            tot = mpc(0)
            for e in range(1, k + 1):
                if k % e:
                    continue
                m = k // e
                if e % N == x1 % N:
                    tot -= zetas[(x2 * m) % N] / m
                if e % N == (-x1) % N:
                    tot -= zetas[(-x2 * m) % N] / m
            re[k] = to_fixed(tot.real, w)
            im[k] = to_fixed(tot.imag, w)
        const = mpmath.log(abs(1 - zetas[x2 % N])) if x1 == 0 else mpf(0)
    return b2, to_fixed(const, w), tuple(re), tuple(im)


def siegel_log_coefficients(x, N, K, bits=None):
    """Public view of the closed-form log coefficients c_k of g_x."""
    w = work_bits() if bits is None else bits
    x1, x2 = units.reduce_index(x, N)
    b2, c0, re, im = _siegel_log(N, x1, x2, K, w)
    return b2, from_fixed(c0, w), [mpc(from_fixed(a, w), from_fixed(b, w)) for a, b in zip(re, im)]


def _exps_of(v):
    if isinstance(v, UnitExpr):
        return v.N, list(v.exps)
    if isinstance(v, ExpVector):
        return v.N, list(v.items())
    raise TypeError("expected a UnitExpr or ExpVector")


def _comb(items, K, w, part):
    """sum_x e_x * (list part of g_x): part 0 -> Re c_k, 1 -> Im c_k."""
    acc = [0] * K
    for (N, x1, x2), e in items:
        lst = _siegel_log(N, x1, x2, K, w)[2 + part]
        if e.denominator == 1:
            ei = int(e)
            for i in range(1, K):
                acc[i] += ei * lst[i]
        else:
            for i in range(1, K):
                acc[i] += _fixed._div_round(e.numerator * lst[i], e.denominator)
    return acc


def _items(exps, N, g):
    out = []
    for x, e in exps:
        y = units.act(x, g, N) if g is not None else units.reduce_index(x, N)
        if y == (0, 0):
            continue
        out.append(((N, y[0], y[1]), Fraction(e)))
    return out


def log_abs_half(exps, N, K, w, g=None):
    """Expansion at oo of log|v|g (iy)| as {j: list}."""
    items = _items(exps, N, g)
    slope = Fraction(0)
    const = 0
    for (_, x1, x2), e in items:
        b2, c0, _, _ = _siegel_log(N, x1, x2, K, w)
        slope += e * b2
        if c0:
            const += _fixed._div_round(e.numerator * c0, e.denominator)
    lst = _comb(items, K, w, 0)
    lst[0] = const
    out = {0: lst}
    if slope:
        # -pi * slope * y
        with mp.workprec(w + 16):
            a = to_fixed(-mp.pi * fmpf(slope), w)
        out[1] = [a] + [0] * (K - 1)
    return out


def darg_half(exps, N, K, w, g=None):
    """Expansion at oo of d/dy arg v|g(iy) as {j: list}."""
    items = _items(exps, N, g)
    lst = _comb(items, K, w, 1)
    with mp.workprec(w + 16):
        L = to_fixed(2 * mp.pi / N, w)
    return {0: [-_fixed.rshift_round(k * L * c, w) for k, c in enumerate(lst)]}


def log_abs_function(v, K, g=IDENTITY, bits=None):
    """log|v|g(iy)| as a class-P function."""
    w = work_bits() if bits is None else bits
    N, exps = _exps_of(v)
    inf = log_abs_half(exps, N, K, w, g)
    zero = log_abs_half(exps, N, K, w, matmul(g, SIGMA))
    return ClassPFun(N, K, inf, zero, w)


def darg_function(v, K, g=IDENTITY, bits=None):
    """Coefficient of dy in d arg v|g along tau = iy."""
    w = work_bits() if bits is None else bits
    N, exps = _exps_of(v)
    inf = darg_half(exps, N, K, w, g)
    z = darg_half(exps, N, K, w, matmul(g, SIGMA))
    zero = {2: [-x for x in z[0]]}
    return ClassPFun(N, K, inf, zero, w)


def dlog_abs_function(v, K, g=IDENTITY, bits=None):
    return log_abs_function(v, K, g, bits).differentiate()


# ---------------------------------------------------------------------------
# polylogarithms of cross-ratio units


def _cusp_const(fn, u, g):
    val = units.cusp_value(u, g, 1)
    if isinstance(val, str):
        return mpf(0)
    return fn(val)


class Expander:
    """Builds and caches class-P data for a fixed level, length and precision."""

    def __init__(self, N, K, bits=None, seam_tol=None):
        self.N = N
        self.K = K
        self.bits = work_bits() if bits is None else bits
        self.seam_tol = seam_tol
        self._log = {}
        self._darg = {}
        self._D = {}
        self._alpha = {}
        self._P = {}

    # cross-ratio units are passed already slashed
    def log_abs(self, u):
        key = u.quad
        r = self._log.get(key)
        if r is None:
            r = log_abs_function(u.as_units(), self.K, bits=self.bits)
            self._log[key] = r
        return r

    def darg(self, u):
        key = u.quad
        r = self._darg.get(key)
        if r is None:
            r = darg_function(u.as_units(), self.K, bits=self.bits)
            self._darg[key] = r
        return r

    def _check_seam(self, f, what):
        if self.seam_tol is not None:
            r = f.seam_residual()
            if r > self.seam_tol:
                raise ArithmeticError(f"{what}: constants at 0 and oo disagree by {mpmath.nstr(r, 5)}")

    def bloch_wigner(self, u):
        """D(u(iy)) as a class-P function."""
        key = u.quad
        r = self._D.get(key)
        if r is not None:
            return r
        uc = u.complement()
        dD = self.log_abs(u) * self.darg(uc) - self.log_abs(uc) * self.darg(u)
        c_inf = _cusp_const(bloch_wigner, u, IDENTITY)
        c_zero = _cusp_const(bloch_wigner, u, SIGMA)
        r = dD.primitive(c_inf, c_zero)
        self._check_seam(r, "D(u)")
        self._D[key] = r
        return r

    def alpha(self, u):
        """alpha(1-u, u) = -log|1-u| dlog|u| + log|u| dlog|1-u|."""
        key = u.quad
        r = self._alpha.get(key)
        if r is None:
            uc = u.complement()
            lu, luc = self.log_abs(u), self.log_abs(uc)
            r = luc * (-lu.differentiate()) + lu * luc.differentiate()
            self._alpha[key] = r
        return r

    def zagier(self, u, m):
        """P_m(u(iy)) (real); L^_m = P_m for odd m and i P_m for even m."""
        if m < 2 or m > MAX_WEIGHT:
            raise ValueError(f"weight {m} outside 2..{MAX_WEIGHT}")
        if m == 2:
            return self.bloch_wigner(u)
        key = (u.quad, m)
        r = self._P.get(key)
        if r is not None:
            return r
        dP = self.phi(u, u.as_units(), m)
        c_inf = _cusp_const(lambda z: zagier_p(m, z), u, IDENTITY)
        c_zero = _cusp_const(lambda z: zagier_p(m, z), u, SIGMA)
        r = dP.primitive(c_inf, c_zero)
        self._check_seam(r, f"P_{m}(u)")
        self._P[key] = r
        return r

    def phi(self, u, v, n, g=IDENTITY):
        """Real class-P Phi with r_n(2)({u}_{n-1} (x) v) = i^[n even] Phi dy.

        ``u`` is an (already slashed) CrossRatioUnit; ``v`` a UnitExpr or
        ExpVector, slashed here by ``g``.
        """
        if n < 3 or n > MAX_WEIGHT:
            raise ValueError(f"weight {n} outside 3..{MAX_WEIGHT}")
        K, w = self.K, self.bits
        lv = log_abs_function(v, K, g, w)
        dav = darg_function(v, K, g, w)
        lead = self.zagier(u, n - 1) * dav
        out = -lead if n % 2 else lead
        cn = _bern_coeff(n - 1)
        if cn:
            lu = self.log_abs(u)
            t = self.alpha(u) * lu.power(n - 3) * lv
            out = out - t.scale(cn)
        if n >= 4:
            lu = self.log_abs(u)
            dlu = lu.differentiate()
            for k in range(2, n - 1):
                ck = _bern_coeff(k)
                if not ck:
                    continue
                t = self.zagier(u, n - k) * lu.power(k - 2) * dlu * lv
                out = out - t.scale(ck)
        return out

    def r32(self, u, v, g=IDENTITY):
        """-D(u) darg v - (1/3) alpha(1-u, u) log|v| for an already slashed u."""
        K, w = self.K, self.bits
        lv = log_abs_function(v, K, g, w)
        dav = darg_function(v, K, g, w)
        return -(self.bloch_wigner(u) * dav) - (self.alpha(u) * lv).scale(Fraction(1, 3))


def _bern_coeff(k):
    """2^k B_k / k! as a Fraction."""
    return Fraction(2 ** k) * _bernoulli_fraction(k) / math.factorial(k)


@lru_cache(maxsize=None)
def _bernoulli_fraction(k):
    # Akiyama-Tanigawa (gives B_1 = +1/2; only k >= 2 is used)
    a = [Fraction(0)] * (k + 1)
    for m in range(k + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
    return a[0]


# ---------------------------------------------------------------------------
# forms and cycle integrals


@dataclass
class FormOnGeodesic:
    phi: ClassPFun
    quad: tuple
    v: object
    gamma: tuple
    n: int = 3

    def integral(self):
        return self.phi.mellin_value()


def r32_form(term, gamma, K, expander=None):
    """Form attached to m {u}_2 (x) v restricted to {gamma 0, gamma oo} (without m)."""
    N = term.v.N
    ex = expander or Expander(N, K)
    U = CrossRatioUnit(N, term.quad).slash(gamma)
    phi = ex.r32(U, term.v, gamma)
    if not phi.is_integrable():
        raise ArithmeticError(f"regulator form is not integrable: {phi.integrability_defects()}")
    return FormOnGeodesic(phi, term.quad, term.v, gamma, 3)


def rn2_form(term, gamma, n, K, expander=None):
    N = term.v.N
    ex = expander or Expander(N, K)
    U = CrossRatioUnit(N, term.quad).slash(gamma)
    phi = ex.phi(U, term.v, n, gamma)
    if not phi.is_integrable():
        raise ArithmeticError(f"regulator form is not integrable: {phi.integrability_defects()}")
    return FormOnGeodesic(phi, term.quad, term.v, gamma, n)


@dataclass
class CycleIntegral:
    value: object
    imag_residual: object
    per_term: list = field(default_factory=list)
    tail_bound: object = 0


def _group_terms(xi):
    """{v key: (ExpVector, [(m, quad)])}."""
    groups = {}
    for t in xi.terms:
        key = tuple(sorted(t.v.items()))
        if not key:
            continue
        groups.setdefault(key, (t.v, []))[1].append((t.m, t.quad))
    return groups


def integrate_many(xis, cycle, K=None, digits=30, n=3, expander=None, seam_tol=None):
    """Integrals of r_n(2)(xi) over a cycle for several cocycles of the same level.

    Terms sharing the same v are aggregated before multiplying by the
    v-dependent factors, so each slashed cross ratio is expanded once.
    """
    if not xis:
        return []
    N = xis[0].N
    if K is None:
        K = truncation_order(N, digits)
    ex = expander or Expander(N, K, seam_tol=seam_tol)
    results = [mpf(0) for _ in xis]
    bounds = [mpf(0) for _ in xis]
    groups = [_group_terms(xi) for xi in xis]
    for nj, g in cycle:
        if nj == 0:
            continue
        # aggregated D (or P_{n-1}) and alpha-type sums per (xi, v group)
        for idx, gr in enumerate(groups):
            for vkey, (v, lst) in gr.items():
                if n == 3:
                    SD = None
                    SA = None
                    for m, quad in lst:
                        U = CrossRatioUnit(N, quad).slash(g)
                        d = ex.bloch_wigner(U).scale(m)
                        a = ex.alpha(U).scale(m)
                        SD = d if SD is None else SD + d
                        SA = a if SA is None else SA + a
                    lv = log_abs_function(v, K, g, ex.bits)
                    dav = darg_function(v, K, g, ex.bits)
                    phi = -(SD * dav) - (SA * lv).scale(Fraction(1, 3))
                else:
                    phi = None
                    for m, quad in lst:
                        U = CrossRatioUnit(N, quad).slash(g)
                        p = ex.phi(U, v, n, g).scale(m)
                        phi = p if phi is None else phi + p
                val, tb = phi.mellin_value(with_bound=True)
                results[idx] += nj * val
                bounds[idx] += abs(nj) * tb
    return [CycleIntegral(r, mpf(0), [], b) for r, b in zip(results, bounds)]


def integrate_cycle(xi, cycle, n=3, K=None, digits=30, per_term=False, expander=None):
    """Sum over matrices and terms of the Mellin values of the regulator forms."""
    if per_term:
        N = xi.N
        if K is None:
            K = truncation_order(N, digits)
        ex = expander or Expander(N, K)
        rows = []
        total = mpf(0)
        for t in xi.terms:
            if t.v.is_zero():
                continue
            s = mpf(0)
            for nj, g in cycle:
                f = r32_form(t, g, K, ex) if n == 3 else rn2_form(t, g, n, K, ex)
                s += nj * f.integral()
            rows.append({"m": t.m, "quadruple": t.quad, "integral": s})
            total += t.m.numerator * s / t.m.denominator
        return CycleIntegral(total, mpf(0), rows)
    return integrate_many([xi], cycle, K, digits, n, expander)[0]


# ---------------------------------------------------------------------------
# direct pointwise evaluation (independent of the class-P pipeline)


class DirectEvaluator:
    """Evaluates the r_3(2) integrand from q-expansions and mpfield only."""

    def __init__(self, N, K):
        self.N = N
        self.K = K
        self._cache = {}

    def _series(self, v):
        s = self._cache.get(v)
        if s is None:
            e = units.unit_expansion(v, self.K)
            ks = [k for k in range(e.val, e.order)]
            s = (e.N, fmpf(e.mu), ks, [e.coeff(k) for k in ks])
            self._cache[v] = s
        return s

    def _val_dlog(self, v, tau):
        """(value, d/dtau log v) of a UnitExpr at tau."""
        N, mu, ks, cs = self._series(v)
        t = mpmath.exp(2j * mp.pi * tau / N)
        tot = mpc(0)
        der = mpc(0)
        tp = t ** ks[0] if ks else 1
        for k, c in zip(ks, cs):
            if c:
                term = c * tp
                tot += term
                der += term * (mpf(k) / N + mu)
            tp *= t
        pref = mpmath.exp(2j * mp.pi * mu * tau) if mu else 1
        return tot * pref, 2j * mp.pi * der / tot

    def unit_at(self, u, g, y):
        """(u|g)(iy) for a CrossRatioUnit, via the expansion at the nearer cusp."""
        y = mpf(y)
        if y >= 1:
            return self._val_dlog(u.slash(g).as_units(), mpc(0, y))
        return self._val_dlog(u.slash(matmul(g, SIGMA)).as_units(), mpc(0, 1 / y))

    def _v_at(self, v, g, y):
        y = mpf(y)
        gg = g if y >= 1 else matmul(g, SIGMA)
        yy = y if y >= 1 else 1 / y
        exps = [(units.act(x, gg, self.N), e) for x, e in v.items()]
        w = UnitExpr.build(self.N, exps)
        return self._val_dlog(w, mpc(0, yy))

    def r32(self, quad, v, g, y):
        """Integrand phi(y) of r_3(2)({u|g}_2 (x) v|g) on tau = iy."""
        y = mpf(y)
        u = CrossRatioUnit(self.N, quad)
        uv, ud = self.unit_at(u, g, y)
        cv, cd = self.unit_at(u.complement(), g, y)
        vv, vd = self._v_at(v, g, y)
        # d/dy of log f(i y) is i f'/f; for y < 1 we evaluated at i/y
        jac = 1 if y >= 1 else -1 / (y * y)
        dl = lambda d: (1j * d) * jac
        dlog_abs = lambda d: dl(d).real
        darg = lambda d: dl(d).imag
        D = bloch_wigner(uv)
        alpha = -mpmath.log(abs(cv)) * dlog_abs(ud) + mpmath.log(abs(uv)) * dlog_abs(cd)
        return -D * darg(vd) - alpha * mpmath.log(abs(vv)) / 3

    def rn2(self, quad, v, g, y, n):
        """Real integrand Phi of r_n(2)({u|g}_{n-1} (x) v|g) on tau = iy."""
        y = mpf(y)
        u = CrossRatioUnit(self.N, quad)
        uv, ud = self.unit_at(u, g, y)
        cv, cd = self.unit_at(u.complement(), g, y)
        vv, vd = self._v_at(v, g, y)
        jac = 1 if y >= 1 else -1 / (y * y)
        dlu = ((1j * ud) * jac).real
        dlc = ((1j * cd) * jac).real
        darg_v = ((1j * vd) * jac).imag
        lu, lc, lv = mpmath.log(abs(uv)), mpmath.log(abs(cv)), mpmath.log(abs(vv))
        lead = zagier_p(n - 1, uv) * darg_v
        out = -lead if n % 2 else lead
        alpha = -lc * dlu + lu * dlc
        cn = _bern_coeff(n - 1)
        out -= fmpf(cn) * alpha * lu ** (n - 3) * lv
        for k in range(2, n - 1):
            out -= fmpf(_bern_coeff(k)) * zagier_p(n - k, uv) * lu ** (k - 2) * dlu * lv
        return out

"""Verification harness: regulator integrals against L-values."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
from mpmath import mp, mpf

from . import lfunc, modsym, regulator, wedge
from .qseries import truncation_order

MAX_HEIGHT = 100
IDENTITY = ((1, 0), (0, 1))


def recognize_rational(x, digits, max_height=MAX_HEIGHT):
    """Small-height rational within 10^-(digits-10) of x, or None."""
    tol = mpf(10) ** (-(digits - 10))
    r = Fraction(mpmath.nstr(x, digits + 5, strip_zeros=False)).limit_denominator(max_height)
    if max(abs(r.numerator), r.denominator) > max_height:
        return None
    if abs(x - mpf(r.numerator) / r.denominator) >= tol:
        return None
    return r


def max_residue(xi):
    """Largest |sum c D(value)| over cusps and embeddings (0 for no terms)."""
    best = mpf(0)
    for r in wedge.residues(xi):
        for v in wedge.numeric_bloch_test(r):
            best = max(best, abs(v))
    return best


def extends(xi, tol=None):
    tol = mpf(10) ** (-30) if tol is None else tol
    return max_residue(xi) < tol


def all_pairs(N):
    return [(a, b) for a in range(1, N) for b in range(a + 1, N)]


def parse_pairs(text, N):
    if text in (None, "all"):
        return all_pairs(N)
    out = []
    for item in text.replace(";", " ").split():
        a, b = item.split(",")
        out.append((int(a) % N, int(b) % N))
    return out


def resolve_cycle(spec, N, curve=None):
    """'builtin' (level 11 only), 'auto' (eigencycle of the curve) or a file path."""
    if isinstance(spec, modsym.Cycle):
        return spec
    if spec == "builtin":
        if N != 11:
            raise ValueError("the built-in cycle is for level 11")
        return modsym.parse_cycle(modsym.CYCLE_11A3)
    if spec in (None, "auto"):
        if curve is None:
            raise ValueError("an eigencycle needs a curve")
        return modsym.eigencycle(N, lfunc.eigenvalue_system(curve))
    return modsym.import_cycle(spec)


@dataclass
class PairReport:
    N: int
    curve: str
    a: int
    b: int
    integral: object
    lprime: object
    ratio: object
    r: object
    passed: bool
    residue: object
    error_bound: object = 0

    def to_json(self, digits):
        s = lambda x: mpmath.nstr(x, digits + 5, strip_zeros=False) if x is not None else None
        return {
            "N": self.N, "curve": self.curve, "a": self.a, "b": self.b,
            "integral": s(self.integral), "lprime": s(self.lprime), "ratio": s(self.ratio),
            "r": None if self.r is None else str(self.r), "pass": self.passed,
            "max_residue": mpmath.nstr(self.residue, 5), "error_bound": mpmath.nstr(self.error_bound, 5),
        }


def verify_curve(N, curve=None, cycle="auto", pairs=None, digits=30, stop_after=None,
                 require_extension=True, expander=None, log=None):
    """Integrals of r_3(2)(xi_1(a,b)) over the eigencycle divided by (pi^2/N) L'(E,-1)."""
    E = lfunc.elliptic_curve(curve) if isinstance(curve, str) else curve
    if E is None:
        E = lfunc.curves_of_conductor(N)[0]
    if E.conductor != N:
        raise ValueError(f"{E.label} has conductor {E.conductor}, not {N}")
    cyc = resolve_cycle(cycle, N, E)
    S = modsym.build_space(N)
    if not modsym.is_closed(S, cyc):
        raise ValueError("cycle is not closed")
    Lp = lfunc.lprime_minus1_elliptic(E, digits)
    scale = mp.pi ** 2 / N * Lp
    K = truncation_order(N, digits)
    ex = expander or regulator.Expander(N, K)
    out = []
    hits = 0
    for a, b in pairs or all_pairs(N):
        xi = wedge.xi1(a, b, N)
        res = max_residue(xi)
        if require_extension and res > mpf(10) ** (-(digits - 5)):
            continue
        ci = regulator.integrate_cycle(xi, cyc, digits=digits, expander=ex)
        ratio = ci.value / scale
        r = recognize_rational(ratio, digits) if abs(ci.value) > mpf(10) ** (-(digits - 10)) else None
        ok = r is not None and r != 0
        rep = PairReport(N, E.label, a, b, ci.value, Lp, ratio, r, ok, res, ci.tail_bound)
        out.append(rep)
        if log:
            log(rep)
        if ok:
            hits += 1
            if stop_after and hits >= stop_after:
                break
    return out


@dataclass
class EisReport:
    N: int
    a: int
    b: int
    integral: object
    target: object
    difference: object
    passed: bool

    def to_json(self, digits):
        s = lambda x: mpmath.nstr(x, digits + 5, strip_zeros=False)
        return {"N": self.N, "a": self.a, "b": self.b, "integral": s(self.integral), "target": s(self.target),
                "difference": mpmath.nstr(self.difference, 5), "pass": self.passed}


def verify_eisenstein(N, pairs=None, digits=30, tol_digits=20, expander=None, log=None):
    """Integral of r_3(2)(xi_1(a,b)) over {0, oo} against -(6 pi^2/N) L'(s~_a s~_b, -1)."""
    K = truncation_order(N, digits)
    ex = expander or regulator.Expander(N, K)
    cyc = modsym.Cycle([(1, IDENTITY)])
    tol = mpf(10) ** (-tol_digits)
    out = []
    for a, b in pairs or all_pairs(N):
        xi = wedge.xi1(a, b, N)
        I = regulator.integrate_cycle(xi, cyc, digits=digits, expander=ex).value
        T = lfunc.eisenstein_target(a, b, N, digits)
        rep = EisReport(N, a, b, I, T, abs(I - T), abs(I - T) < tol)
        out.append(rep)
        if log:
            log(rep)
    return out


def pointwise_check(xi, cycle, K, count=5, seed=0, expander=None, terms=None):
    """Max |phi(y) - direct(y)| over random y in (0.5, 3) for the assembled r_3(2) forms."""
    N = xi.N
    ex = expander or regulator.Expander(N, K)
    de = regulator.DirectEvaluator(N, K)
    rng = random.Random(seed)
    worst = mpf(0)
    chosen = [t for t in xi.terms if not t.v.is_zero()]
    if terms is not None:
        chosen = chosen[:terms]
    for t in chosen:
        for _, g in cycle:
            f = regulator.r32_form(t, g, K, ex)
            for _ in range(count):
                y = mpf(rng.uniform(0.5, 3.0))
                worst = max(worst, abs(f.phi(y) - de.r32(t.quad, t.v, g, y)))
    return worst

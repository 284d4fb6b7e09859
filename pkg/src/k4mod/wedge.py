"""Exact exterior algebra on Siegel exponent vectors.

Keys are ±-canonical indices of (Z/N)^2 minus 0 (g_{-x} = g_x up to
constants, g_0 = 1).  Everything is exact rational arithmetic; nothing in
this module looks at q-expansions except :func:`residues`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import units
from .mpfield import bloch_wigner
from .units import pm_canon


# ---------------------------------------------------------------------------
# sparse exact vectors


class ExpVector(dict):
    """Finitely supported map from ±-classes to Fractions."""

    def __init__(self, N, data=()):
        super().__init__()
        self.N = N
        for k, v in dict(data).items() if isinstance(data, dict) else data:
            self.add_term(k, v)

    def add_term(self, x, c):
        key = pm_canon(x, self.N)
        if key == (0, 0):
            return
        v = self.get(key, Fraction(0)) + Fraction(c)
        if v:
            self[key] = v
        else:
            self.pop(key, None)

    @staticmethod
    def basis(x, N):
        return ExpVector(N, [(x, 1)])

    @staticmethod
    def from_unit(v):
        return ExpVector(v.N, v.exps)

    def __add__(self, other):
        out = ExpVector(self.N, self)
        for k, v in other.items():
            out.add_term(k, v)
        return out

    def __sub__(self, other):
        return self + other.scaled(-1)

    def scaled(self, c):
        c = Fraction(c)
        return ExpVector(self.N, [(k, v * c) for k, v in self.items()])

    def is_zero(self):
        return not self

    def to_unit(self):
        return units.UnitExpr.build(self.N, list(self.items()), 0, True)

    def to_json(self):
        return [[list(k), str(v)] for k, v in sorted(self.items())]

    @staticmethod
    def from_json(N, data):
        return ExpVector(N, [(tuple(k), Fraction(v)) for k, v in data])


class Wedge(dict):
    """Element of Lambda^n: sorted key tuples -> Fractions."""

    def __init__(self, degree, data=()):
        super().__init__()
        self.degree = degree
        for k, v in dict(data).items() if isinstance(data, dict) else data:
            self.add_term(k, v)

    def add_term(self, keys, c):
        if c == 0:
            return
        keys = list(keys)
        if len(set(keys)) < len(keys):
            return
        sign = 1
        # insertion sort, counting transpositions
        for i in range(1, len(keys)):
            j = i
            while j > 0 and keys[j - 1] > keys[j]:
                keys[j - 1], keys[j] = keys[j], keys[j - 1]
                sign = -sign
                j -= 1
        k = tuple(keys)
        v = self.get(k, Fraction(0)) + sign * Fraction(c)
        if v:
            self[k] = v
        else:
            self.pop(k, None)

    def __add__(self, other):
        if other.degree != self.degree:
            raise ValueError("degree mismatch")
        out = Wedge(self.degree, self)
        for k, v in other.items():
            out.add_term(k, v)
        return out

    def __iadd__(self, other):
        for k, v in other.items():
            self.add_term(k, v)
        return self

    def __sub__(self, other):
        return self + other.scaled(-1)

    def scaled(self, c):
        c = Fraction(c)
        return Wedge(self.degree, [(k, v * c) for k, v in self.items()])

    def is_zero(self):
        return not self


def wedge(*vectors):
    """v1 ^ v2 ^ ... as a Wedge."""
    out = Wedge(len(vectors))
    terms = [([], Fraction(1))]
    for v in vectors:
        terms = [(ks + [k], c * x) for ks, c in terms for k, x in v.items()]
    for ks, c in terms:
        out.add_term(ks, c)
    return out


# ---------------------------------------------------------------------------
# cross ratios as exponent vectors


def _add(x, y, s=1):
    return (x[0] + s * y[0], x[1] + s * y[1])


def u_pattern(quad):
    """The eight (index, sign) pairs of u(a,b,c,d), ignoring constants."""
    a, b, c, d = quad
    return [(_add(c, a), 1), (_add(c, a, -1), 1), (_add(d, b), 1), (_add(d, b, -1), 1),
            (_add(c, b), -1), (_add(c, b, -1), -1), (_add(d, a), -1), (_add(d, a, -1), -1)]


def u_vector(quad, N):
    return ExpVector(N, u_pattern(quad))


def delta2(quad, N):
    """delta(a,b,c,d) = u(a,b,c,d) ^ u(a,c,b,d); zero if not distinct."""
    if not units.is_distinct(quad, N):
        return Wedge(2)
    a, b, c, d = quad
    return wedge(u_vector(quad, N), u_vector((a, c, b, d), N))


def phi(x, y, z, N):
    """phi(x,y,z) built from the products g_{z+x} g_{z-x}, g_{y+x} g_{y-x}, g_{z+y} g_{z-y}."""
    A = ExpVector(N, [(_add(z, x), 1), (_add(z, x, -1), 1)])
    B = ExpVector(N, [(_add(y, x), 1), (_add(y, x, -1), 1)])
    C = ExpVector(N, [(_add(z, y), 1), (_add(z, y, -1), 1)])
    return wedge(A, B) + wedge(B, C) + wedge(C, A)


def manin_lhs(a, b, N):
    """g_a ^ g_b + g_b ^ g_c + g_c ^ g_a with c = -a-b."""
    c = (-a[0] - b[0], -a[1] - b[1])
    ga, gb, gc = (ExpVector.basis(x, N) for x in (a, b, c))
    return wedge(ga, gb) + wedge(gb, gc) + wedge(gc, ga)


# ---------------------------------------------------------------------------
# subgroups and triangulations


def subgroup(N, kind):
    """'gamma1' -> {0} x Z/N, 'full' -> (Z/N)^2, as sorted element lists."""
    if kind == "gamma1":
        return [(0, j) for j in range(N)]
    if kind == "full":
        return [(i, j) for i in range(N) for j in range(N)]
    raise ValueError("subgroup kind must be 'gamma1' or 'full'")


def _red(x, N):
    return (x[0] % N, x[1] % N)


def triangulate(G, a, b, N):
    """Rational combination [(m, quad)] with sum m * delta(quad) = manin_lhs(a, b).

    Quadruples are kept exactly as the formula produces them (reduced mod N);
    those that are not distinct (delta = 0) are dropped.
    """
    n = len(G)
    out = []
    w1 = Fraction(1, n)
    zero = (0, 0)
    for x in G:
        q = (zero, x, _add(a, x, -1), _add(b, x))
        q = tuple(_red(y, N) for y in q)
        if units.is_distinct(q, N):
            out.append((w1, q))
    if n % 2 == 0:
        w2 = Fraction(1, 4 * n * n)
        ab = _add(a, b)
        for x in G:
            x2 = _add(x, x)
            for y in G:
                for sgn, p, z in ((1, a, _add(b, x2)), (-1, b, _add(a, x2)), (-1, ab, _add(b, x2))):
                    q = tuple(_red(t, N) for t in (zero, p, z, y))
                    if units.is_distinct(q, N):
                        out.append((sgn * w2, q))
    return merge_terms(out, N)


def canonical_quad(q, N):
    return tuple(pm_canon(x, N) for x in q)


def merge_terms(terms, N):
    acc = {}
    order = []
    for m, q in terms:
        k = canonical_quad(q, N)
        if k not in acc:
            acc[k] = Fraction(0)
            order.append(k)
        acc[k] += m
    return [(acc[k], k) for k in order if acc[k] != 0]


def triangulation_image(terms, N):
    out = Wedge(2)
    for m, q in terms:
        out += delta2(q, N).scaled(m)
    return out


# ---------------------------------------------------------------------------
# dense integer engine for bulk verification


class DenseSpace:
    """Lambda^2 of the ±-class lattice as dense integer vectors."""

    def __init__(self, N):
        self.N = N
        keys = sorted({pm_canon((i, j), N) for i in range(N) for j in range(N)} - {(0, 0)})
        self.keys = keys
        self.index = {k: i for i, k in enumerate(keys)}
        n = len(keys)
        self.n = n
        iu = np.triu_indices(n, 1)
        self._iu = iu
        self.dim = len(iu[0])
        self._delta = {}
        self._S = {}

    def vec(self, pattern):
        v = np.zeros(self.n, dtype=np.int64)
        N = self.N
        for x, s in pattern:
            k = pm_canon(x, N)
            if k != (0, 0):
                v[self.index[k]] += s
        return v

    def wedge2(self, u, w):
        m = np.outer(u, w)
        m = m - m.T
        return m[self._iu]

    def delta(self, q):
        N = self.N
        key = canonical_quad(q, N)
        r = self._delta.get(key)
        if r is None:
            if len(set(key)) < 4:
                r = np.zeros(self.dim, dtype=np.int64)
            else:
                a, b, c, d = key
                r = self.wedge2(self.vec(u_pattern(key)), self.vec(u_pattern((a, c, b, d))))
            self._delta[key] = r
        return r

    def S(self, p, z, G):
        """sum over y in G of delta(0, p, z, y)."""
        cache = self._S.setdefault(tuple(G), {})
        key = (pm_canon(p, self.N), _red(z, self.N))
        r = cache.get(key)
        if r is None:
            r = np.zeros(self.dim, dtype=np.int64)
            for y in G:
                r = r + self.delta(((0, 0), p, z, y))
            cache[key] = r
        return r

    def lhs(self, a, b):
        c = (-a[0] - b[0], -a[1] - b[1])
        ga, gb, gc = (self.vec([(x, 1)]) for x in (a, b, c))
        return self.wedge2(ga, gb) + self.wedge2(gb, gc) + self.wedge2(gc, ga)

    def check_triangulation(self, G, a, b):
        """Exact check of the triangulation identity, scaled by 4|G|^2."""
        n = len(G)
        N = self.N
        rhs = np.zeros(self.dim, dtype=np.int64)
        for x in G:
            rhs += self.delta(((0, 0), x, _add(a, x, -1), _add(b, x)))
        if n % 2 == 0:
            rhs *= 4 * n
            ab = _add(a, b)
            for x in G:
                x2 = _add(x, x)
                rhs += self.S(a, _add(b, x2), G) - self.S(b, _add(a, x2), G) - self.S(ab, _add(b, x2), G)
            scale = 4 * n * n
        else:
            scale = n
        return bool(np.array_equal(rhs, scale * self.lhs(a, b)))


# ---------------------------------------------------------------------------
# motivic cocycles


@dataclass
class CocycleTerm:
    m: Fraction
    quad: tuple
    v: ExpVector

    def unit(self, N):
        return units.CrossRatioUnit(N, self.quad)


@dataclass
class MotivicCocycle:
    N: int
    G: str
    a: tuple
    b: tuple
    terms: list

    def canonical(self):
        acc = {}
        order = []
        for t in self.terms:
            key = (t.quad, tuple(sorted(t.v.items())))
            if key not in acc:
                acc[key] = [Fraction(0), t.v]
                order.append(key)
            acc[key][0] += t.m
        terms = [CocycleTerm(acc[k][0], k[0], acc[k][1]) for k in order if acc[k][0] != 0]
        return MotivicCocycle(self.N, self.G, self.a, self.b, terms)

    def group_by_unit(self):
        """Sum of m * v per cross ratio: the tensor factors after grouping."""
        acc = {}
        for t in self.terms:
            acc.setdefault(t.quad, ExpVector(self.N))
            acc[t.quad] = acc[t.quad] + t.v.scaled(t.m)
        return acc

    def __add__(self, other):
        if self.N != other.N:
            raise ValueError("level mismatch")
        return MotivicCocycle(self.N, self.G, self.a, self.b, self.terms + other.terms)

    def to_json(self):
        return {
            "N": self.N,
            "G": self.G,
            "a": list(self.a),
            "b": list(self.b),
            "terms": [{"m": str(t.m), "quadruple": [list(x) for x in t.quad], "v_expvector": t.v.to_json()}
                      for t in self.terms],
        }

    def dumps(self):
        return json.dumps(self.to_json(), indent=1)

    @staticmethod
    def from_json(data):
        N = int(data["N"])
        terms = []
        for t in data["terms"]:
            q = tuple(pm_canon(tuple(x), N) for x in t["quadruple"])
            terms.append(CocycleTerm(Fraction(t["m"]), q, ExpVector.from_json(N, t["v_expvector"])))
        return MotivicCocycle(N, data.get("G", "gamma1"), tuple(data["a"]), tuple(data["b"]), terms)


def _as_index(x, kind):
    if isinstance(x, int):
        return (0, x) if kind == "gamma1" else (0, x)
    return tuple(x)


def build_xi(G_kind, a, b, N, triangulation=None):
    """xi_G(a, b) = sum m_i {u_i}_2 (x) g_b/g_a."""
    a = _as_index(a, G_kind)
    b = _as_index(b, G_kind)
    G = subgroup(N, G_kind)
    if triangulation is None:
        triangulation = triangulate(G, a, b, N)
    v = ExpVector(N, [(b, 1), (a, -1)])
    terms = [CocycleTerm(m, canonical_quad(q, N), v) for m, q in triangulation]
    return MotivicCocycle(N, G_kind, a, b, terms)


def xi1(a, b, N):
    return build_xi("gamma1", a, b, N)


def delta3(xi):
    """sum m u ^ (1-u) ^ v over the terms of a cocycle."""
    out = Wedge(3)
    N = xi.N
    for t in xi.terms:
        a, b, c, d = t.quad
        out += wedge(u_vector(t.quad, N), u_vector((a, c, b, d), N), t.v).scaled(t.m)
    return out


# ---------------------------------------------------------------------------
# residues at cusps


@dataclass
class ResidueElement:
    cusp: str
    terms: list  # (coefficient, tuple of values per embedding)
    embeddings: tuple


def residues(xi, level=None):
    """Residue of xi at each cusp: sum m ord(v) {u(cusp)}_2 per embedding."""
    N = xi.N
    if level is None:
        level = "gamma1" if xi.G == "gamma1" else "gamma"
    if level == "gamma1":
        cusps = [(c.repr(), c.matrix, Fraction(c.width, N)) for c in units.gamma1_cusps(N)]
    else:
        cusps = []
        for a, c in units.gamma_n_cusps(N):
            g = units._lift_column(a, c, N)
            cusps.append((f"{a}/{c} mod {N}", g, Fraction(1)))
    ts = tuple(units.units_group(N))
    out = []
    for name, g, scale in cusps:
        terms = []
        for t in xi.terms:
            if t.v.is_zero():
                continue
            o = units.order_q1n(t.v.to_unit(), g) * scale
            if o == 0:
                continue
            u = units.CrossRatioUnit(N, t.quad)
            vals = tuple(units.cusp_value(u, g, s) for s in ts)
            if any(isinstance(z, str) for z in vals):
                continue
            if vals[0] == 1:
                continue
            terms.append((t.m * o, vals))
        out.append(ResidueElement(name, terms, ts))
    return out


def numeric_bloch_test(r):
    """Per-embedding sum of coefficient * D(value)."""
    tot = [0] * len(r.embeddings)
    for c, vals in r.terms:
        for i, z in enumerate(vals):
            tot[i] += (c.numerator * bloch_wigner(z)) / c.denominator
    return tot

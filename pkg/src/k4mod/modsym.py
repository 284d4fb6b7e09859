"""Weight-2 modular symbols for Gamma_1(N) through Manin symbols.

A Manin symbol (c, d) stands for {g0, g oo} where g = [[a, b], [c, d]] is any
lift to SL2(Z); (c, d) and (-c, -d) are identified.  Relations:
x + x sigma = 0 and x + x tau + x tau^2 = 0, with
(c, d) sigma = (d, -c) and (c, d) tau = (d, -c - d).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .units import _lift_column, gamma1_cusp_key

SIGMA = ((0, -1), (1, 0))
TAU = ((0, -1), (1, -1))


# ---------------------------------------------------------------------------
# exact linear algebra over Q (rows are lists of Fractions)


def rref(rows, ncols):
    """Reduced row echelon form; returns (rows, pivot columns)."""
    m = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / Fraction(m[r][c])
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def nullspace(rows, ncols):
    """Basis (list of vectors) of {x : rows . x = 0}."""
    red, piv = rref(rows, ncols) if rows else ([], [])
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(red, piv):
            v[p] = -row[f]
        basis.append(v)
    return basis


def _matvec(M, v):
    return [sum((a * b for a, b in zip(row, v)), Fraction(0)) for row in M]


def _primitive_integral(v):
    """Scale a rational vector to a primitive integer vector with first nonzero entry > 0."""
    den = 1
    for x in v:
        den = den * Fraction(x).denominator // math.gcd(den, Fraction(x).denominator)
    w = [int(Fraction(x) * den) for x in v]
    g = 0
    for x in w:
        g = math.gcd(g, x)
    w = [x // g for x in w] if g else w
    first = next((x for x in w if x), 0)
    return [-x for x in w] if first < 0 else w


def solve_in_span(basis, v):
    """Coordinates of v in the span of the given (independent) vectors, or None."""
    n = len(basis)
    if n == 0:
        return [] if not any(v) else None
    dim = len(v)
    rows = [[basis[j][i] for j in range(n)] + [Fraction(v[i])] for i in range(dim)]
    red, piv = rref(rows, n + 1)
    if n in piv:
        return None
    x = [Fraction(0)] * n
    for row, p in zip(red, piv):
        x[p] = row[n]
    return x


# ---------------------------------------------------------------------------
# Manin symbols


def canonical_symbol(c, d, N):
    c %= N
    d %= N
    return min((c, d), ((-c) % N, (-d) % N))


def symbol_matrix(c, d, N):
    """A matrix [[a, b], [c', d']] in SL2(Z) with (c', d') = (c, d) mod N."""
    (dd, my), (cc, x) = _lift_column(d, c, N)
    # dd*x + cc*(-my) = 1 -> [[x, my], [cc, dd]] has det x*dd - my*cc = 1
    return ((x, my), (cc, dd))


def act_right(sym, g, N):
    c, d = sym
    return canonical_symbol(c * g[0][0] + d * g[1][0], c * g[0][1] + d * g[1][1], N)


def heilbronn_merel(p):
    """Matrices [[a, b], [c, d]] with ad - bc = p, a > b >= 0, d > c >= 0."""
    out = []
    for a in range(1, p + 1):
        for d in range(1, p + 1):
            r = a * d - p
            if r < 0:
                continue
            for b in range(a):
                if b == 0:
                    if r == 0:
                        out.extend(((a, 0), (c, d)) for c in range(d))
                    continue
                if r % b:
                    continue
                c = r // b
                if c < d:
                    out.append(((a, b), (c, d)))
    return out


@dataclass
class SymbolSpace:
    N: int
    symbols: list  # canonical Manin symbols
    index: dict  # symbol -> position
    coords: list  # symbol position -> vector in the basis (Fractions)
    basis: list  # positions of basis symbols
    cusps: list  # cusp keys
    boundary: list = field(default_factory=list)  # rows: cusp, columns: basis
    star: list = field(default_factory=list)  # matrix on basis (columns = images)
    cuspidal: list = field(default_factory=list)  # basis vectors of ker(boundary)
    plus: list = field(default_factory=list)  # basis vectors of cuspidal plus space

    @property
    def dimension(self):
        return len(self.basis)

    def vector(self, sym):
        """Coordinates of a Manin symbol (c, d)."""
        s = canonical_symbol(sym[0], sym[1], self.N)
        return list(self.coords[self.index[s]])

    def path_vector(self, g):
        """Coordinates of {g0, g oo} for an integral matrix g of determinant 1."""
        return self.vector((g[1][0], g[1][1]))

    def cycle_vector(self, cycle):
        v = [Fraction(0)] * self.dimension
        for n, g in cycle.terms:
            w = self.path_vector(g)
            v = [a + n * b for a, b in zip(v, w)]
        return v

    def boundary_of(self, v):
        return _matvec(self.boundary, v)

    def star_of(self, v):
        return _matvec(self.star, v)

    def symbol_of_basis(self, i):
        return self.symbols[self.basis[i]]

    def plus_dimension(self):
        return len(self.plus)


def _cusp_of(num, den, N):
    return gamma1_cusp_key(num, den, N)


@lru_cache(maxsize=64)
def build_space(N):
    """Relation quotient with boundary, star and the cuspidal plus part."""
    if N < 1:
        raise ValueError("level must be positive")
    syms = []
    index = {}
    for c in range(N):
        for d in range(N):
            if math.gcd(math.gcd(c, d), N) != 1:
                continue
            s = canonical_symbol(c, d, N)
            if s not in index:
                index[s] = len(syms)
                syms.append(s)
    n = len(syms)
    # two-term relations: x = -x sigma
    parent = list(range(n))
    sign = [1] * n  # x_i = sign[i] * x_parent
    zero = [False] * n

    def find(i):
        s = 1
        while parent[i] != i:
            s *= sign[i]
            i = parent[i]
        return i, s

    for i, s in enumerate(syms):
        j = index[act_right(s, SIGMA, N)]
        ri, si = find(i)
        rj, sj = find(j)
        # x_i + x_j = 0 -> si x_ri = -sj x_rj
        if ri == rj:
            if si == sj:
                zero[ri] = True
            continue
        parent[rj] = ri
        sign[rj] = -si * sj
    free = sorted({find(i)[0] for i in range(n)})
    free = [r for r in free if not zero[r]]
    fpos = {r: k for k, r in enumerate(free)}
    m = len(free)

    def two_term(i):
        r, s = find(i)
        v = [Fraction(0)] * m
        if r in fpos and not zero[r]:
            v[fpos[r]] = Fraction(s)
        return v

    # three-term relations in terms of the free generators
    rels = []
    seen = set()
    for i, s in enumerate(syms):
        orbit = (i, index[act_right(s, TAU, N)], index[act_right(act_right(s, TAU, N), TAU, N)])
        key = tuple(sorted(orbit))
        if key in seen:
            continue
        seen.add(key)
        v = [Fraction(0)] * m
        for j in orbit:
            v = [a + b for a, b in zip(v, two_term(j))]
        if any(v):
            rels.append(v)
    red, piv = rref(rels, m) if rels else ([], [])
    nonpiv = [c for c in range(m) if c not in piv]
    bpos = {c: k for k, c in enumerate(nonpiv)}
    coords = []
    for i in range(n):
        t = two_term(i)
        out = [Fraction(0)] * len(nonpiv)
        for c, x in enumerate(t):
            if not x:
                continue
            if c in bpos:
                out[bpos[c]] += x
            else:
                row = red[piv.index(c)]
                for cc, y in enumerate(row):
                    if cc != c and y:
                        out[bpos[cc]] -= x * y
        coords.append(out)
    basis = [free[c] for c in nonpiv]
    space = SymbolSpace(N, syms, index, coords, basis, [])
    _finish_space(space)
    return space


def _finish_space(S):
    N = S.N
    dim = S.dimension
    # boundary
    cusp_index = {}
    cols = []
    for pos in S.basis:
        c, d = S.symbols[pos]
        g = symbol_matrix(c, d, N)
        a, b = g[0][0], g[0][1]
        cc, dd = g[1][0], g[1][1]
        top = _cusp_of(a, cc, N)
        bot = _cusp_of(b, dd, N)
        col = {}
        for key, s in ((top, 1), (bot, -1)):
            if key not in cusp_index:
                cusp_index[key] = len(cusp_index)
            col[cusp_index[key]] = col.get(cusp_index[key], 0) + s
        cols.append(col)
    S.cusps = list(cusp_index)
    S.boundary = [[Fraction(cols[j].get(i, 0)) for j in range(dim)] for i in range(len(S.cusps))]
    # star: (c, d) -> (-c, d)
    star_cols = [S.vector((-S.symbols[p][0], S.symbols[p][1])) for p in S.basis]
    S.star = [[star_cols[j][i] for j in range(dim)] for i in range(dim)]
    S.cuspidal = nullspace(S.boundary, dim)
    # plus part inside the cuspidal space: (star - 1) v = 0
    k = len(S.cuspidal)
    if k:
        M = [[Fraction(0)] * k for _ in range(dim)]
        for j, v in enumerate(S.cuspidal):
            w = S.star_of(v)
            for i in range(dim):
                M[i][j] = w[i] - v[i]
        ker = nullspace(M, k)
        S.plus = [[sum((c * S.cuspidal[j][i] for j, c in enumerate(kv)), Fraction(0)) for i in range(dim)]
                  for kv in ker]


def hecke_on_symbols(S, p):
    """Matrix (on the full symbol basis) of T_p (U_p when p | N) via Merel's matrices."""
    N = S.N
    H = heilbronn_merel(p)
    dim = S.dimension
    cols = []
    for pos in S.basis:
        c, d = S.symbols[pos]
        v = [Fraction(0)] * dim
        for h in H:
            cc = c * h[0][0] + d * h[1][0]
            dd = c * h[0][1] + d * h[1][1]
            if math.gcd(math.gcd(cc, dd), N) != 1:
                continue
            w = S.vector((cc, dd))
            v = [a + b for a, b in zip(v, w)]
        cols.append(v)
    return [[cols[j][i] for j in range(dim)] for i in range(dim)]


def restrict(S, M, sub):
    """Matrix of M on the invariant subspace spanned by ``sub`` (columns = images)."""
    k = len(sub)
    out = [[Fraction(0)] * k for _ in range(k)]
    for j, v in enumerate(sub):
        w = _matvec(M, v)
        x = solve_in_span(sub, w)
        if x is None:
            raise ArithmeticError("subspace is not invariant")
        for i in range(k):
            out[i][j] = x[i]
    return out


def hecke(p, S, subspace="plus"):
    """Matrix of T_p on the cuspidal plus subspace (or 'cuspidal' / 'full')."""
    M = hecke_on_symbols(S, p)
    if subspace == "full":
        return M
    sub = S.plus if subspace == "plus" else S.cuspidal
    return restrict(S, M, sub)


def charpoly(M):
    """Characteristic polynomial coefficients (highest degree first) by Faddeev-LeVerrier."""
    n = len(M)
    coeffs = [Fraction(1)]
    A = [[Fraction(0)] * n for _ in range(n)]
    Mk = [row[:] for row in A]
    for k in range(1, n + 1):
        # Mk = M (M_{k-1} + c_{k-1} I)
        B = [[Mk[i][j] + (coeffs[-1] if i == j else 0) for j in range(n)] for i in range(n)]
        Mk = [[sum((M[i][t] * B[t][j] for t in range(n)), Fraction(0)) for j in range(n)] for i in range(n)]
        c = -sum((Mk[i][i] for i in range(n)), Fraction(0)) / k
        coeffs.append(c)
    return coeffs


# ---------------------------------------------------------------------------
# cycles


@dataclass
class Cycle:
    terms: list = field(default_factory=list)  # (n, ((a, b), (c, d)))
    closed: bool = False

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)

    def to_json(self):
        return {"closed": self.closed, "terms": [[n, [list(r) for r in g]] for n, g in self.terms]}

    @staticmethod
    def from_json(data):
        return Cycle([(int(n), tuple(tuple(int(x) for x in r) for r in g)) for n, g in data["terms"]],
                     bool(data.get("closed", False)))

    def to_text(self):
        return "".join(f"{n} {g[0][0]} {g[0][1]} {g[1][0]} {g[1][1]}\n" for n, g in self.terms)

    def scaled(self, k):
        return Cycle([(k * n, g) for n, g in self.terms], self.closed)

    def star(self):
        """Image under tau -> -conj(tau): g -> diag(-1, 1) g diag(-1, 1)."""
        return Cycle([(n, ((g[0][0], -g[0][1]), (-g[1][0], g[1][1]))) for n, g in self.terms], self.closed)

    def paths(self):
        """(n, start, end) with cusps as Fractions or None for infinity."""
        out = []
        for n, g in self.terms:
            out.append((n, _frac(g[0][1], g[1][1]), _frac(g[0][0], g[1][0])))
        return out


def _frac(a, c):
    return None if c == 0 else Fraction(a, c)


def convergent_matrices(r):
    """Matrices g_k with {oo, r} = sum_k {g_k 0, g_k oo} (Manin's continued fractions)."""
    if r is None:
        return []
    r = Fraction(r)
    # continued fraction digits with floor
    digits = []
    x = r
    while True:
        a = math.floor(x)
        digits.append(a)
        if x == a:
            break
        x = 1 / (x - a)
    # {p_{k-1}/q_{k-1}, p_k/q_k} = g_k {0, oo} with
    # g_k = [[p_k, s p_{k-1}], [q_k, s q_{k-1}]], s = (-1)^(k-1)
    out = []
    p_prev, q_prev = 1, 0
    p, q = digits[0], 1
    s = -1
    out.append(((p, p_prev * s), (q, q_prev * s)))
    for a in digits[1:]:
        p_prev, q_prev, p, q = p, q, a * p + p_prev, a * q + q_prev
        s = -s
        out.append(((p, p_prev * s), (q, q_prev * s)))
    for g in out:
        if g[0][0] * g[1][1] - g[0][1] * g[1][0] != 1:
            raise ArithmeticError("continued fraction produced a non-unimodular matrix")
    return out


def path_to_cycle_terms(alpha, beta, n=1):
    """Manin decomposition of n {alpha, beta}; cusps are Fractions or None (= oo)."""
    if alpha is not None and beta is not None:
        g = _unimodular_between(alpha, beta)
        if g is not None:
            return [(n, g)]
    terms = [(n, g) for g in convergent_matrices(beta)]
    terms += [(-n, g) for g in convergent_matrices(alpha)]
    return terms


def _unimodular_between(alpha, beta):
    """g in SL2(Z) with g0 = alpha and g oo = beta if the pair is adjacent."""
    a, c = beta.numerator, beta.denominator
    b, d = alpha.numerator, alpha.denominator
    det = a * d - b * c
    if det == 1:
        return ((a, b), (c, d))
    if det == -1:
        return ((-a, b), (-c, d))
    return None


_MAGMA = re.compile(r"([+-]?\s*\d*)\s*\*?\s*\{\s*([^,{}]+?)\s*,\s*([^,{}]+?)\s*\}")


def _parse_cusp(s):
    s = s.strip()
    if s.lower() in ("oo", "infinity", "inf"):
        return None
    return Fraction(s)


def parse_cycle(text):
    """Parse either lines 'n a b c d' or a Magma-style sum of {alpha, beta}."""
    text = text.strip()
    if not text:
        return Cycle([])
    if "{" in text:
        terms = []
        for m in _MAGMA.finditer(text):
            coef = m.group(1).replace(" ", "")
            if coef in ("", "+"):
                k = 1
            elif coef == "-":
                k = -1
            else:
                k = int(coef)
            terms.extend(path_to_cycle_terms(_parse_cusp(m.group(2)), _parse_cusp(m.group(3)), k))
        if not terms:
            raise ValueError("no {alpha, beta} pairs found")
        return Cycle(terms)
    terms = []
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 5:
            raise ValueError(f"line {ln}: expected 'n a b c d'")
        n, a, b, c, d = (int(x) for x in parts)
        if a * d - b * c != 1:
            raise ValueError(f"line {ln}: matrix is not in SL2(Z)")
        terms.append((n, ((a, b), (c, d))))
    return Cycle(terms)


def import_cycle(path):
    with open(path) as fh:
        return parse_cycle(fh.read())


CYCLE_11A3 = "-1*{-1/2, 0} + {-1/4, 0} + -1*{7/15, 1/2}"


# ---------------------------------------------------------------------------
# eigencycles


def is_closed(S, cycle):
    return not any(S.boundary_of(S.cycle_vector(cycle)))


def eigenspace(S, eigenvalues, subspace="plus"):
    """Intersection of ker(T_p - a_p) over the given {p: a_p} inside the subspace."""
    sub = S.plus if subspace == "plus" else S.cuspidal
    k = len(sub)
    vecs = [[Fraction(int(i == j)) for i in range(k)] for j in range(k)]
    for p in sorted(eigenvalues):
        T = restrict(S, hecke_on_symbols(S, p), sub)
        ap = eigenvalues[p]
        if not vecs:
            break
        # restrict (T - a_p) to span(vecs) and take the kernel
        rows = []
        for i in range(k):
            rows.append([sum((T[i][t] * v[t] for t in range(k)), Fraction(0)) - ap * v[i] for v in vecs])
        ker = nullspace(rows, len(vecs))
        vecs = [[sum((c * vecs[j][i] for j, c in enumerate(kv)), Fraction(0)) for i in range(k)] for kv in ker]
    return [[sum((c * sub[j][i] for j, c in enumerate(v)), Fraction(0)) for i in range(S.dimension)] for v in vecs]


def _symbol_lattice_is_standard(S):
    return all(x.denominator == 1 for v in S.coords for x in v)


def eigencycle(N, eigenvalues):
    """Integral generator of the plus eigenspace as a Cycle of Manin symbols.

    ``eigenvalues`` maps primes p to a_p (typically all p <= 30).
    """
    S = build_space(N)
    sp = eigenspace(S, eigenvalues)
    if len(sp) != 1:
        raise ArithmeticError(f"eigenspace has dimension {len(sp)}, expected 1")
    v = sp[0]
    if not _symbol_lattice_is_standard(S):
        v = _saturate_in_symbol_lattice(S, v)
    w = _primitive_integral(v)
    terms = []
    for i, n in enumerate(w):
        if n:
            c, d = S.symbol_of_basis(i)
            terms.append((n, symbol_matrix(c, d, N)))
    return Cycle(terms, closed=True)


def _saturate_in_symbol_lattice(S, v):
    """Rescale v to be primitive in the lattice spanned by all symbol images."""
    # Hermite basis of the symbol lattice
    from math import lcm

    den = 1
    for row in S.coords:
        for x in row:
            den = lcm(den, x.denominator)
    rows = [[int(x * den) for x in row] for row in S.coords]
    basis = _hnf_rows(rows)
    coords = solve_in_span([[Fraction(x, den) for x in b] for b in basis], v)
    coords = _primitive_integral(coords)
    out = [Fraction(0)] * S.dimension
    for c, b in zip(coords, basis):
        for i, x in enumerate(b):
            out[i] += Fraction(c * x, den)
    return out


def _hnf_rows(rows):
    """Row-style Hermite normal form basis of the Z-span of integer rows."""
    rows = [r[:] for r in rows if any(r)]
    if not rows:
        return []
    ncols = len(rows[0])
    out = []
    col = 0
    while rows and col < ncols:
        nz = [r for r in rows if r[col]]
        if not nz:
            col += 1
            continue
        while len([r for r in rows if r[col]]) > 1:
            nz = sorted((r for r in rows if r[col]), key=lambda r: abs(r[col]))
            piv = nz[0]
            for r in nz[1:]:
                q = r[col] // piv[col]
                for i in range(ncols):
                    r[i] -= q * piv[i]
            rows = [r for r in rows if any(r)]
        piv = next(r for r in rows if r[col])
        rows.remove(piv)
        out.append(piv)
        col += 1
    return out


# ---------------------------------------------------------------------------
# genus oracle


def _factor(n):
    out = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _phi(n):
    r = n
    for p in _factor(n):
        r = r // p * (p - 1)
    return r


def gamma1_genus(N):
    """Genus of X_1(N) (standard index and cusp count formula)."""
    if N <= 4:
        return 0
    mu = Fraction(N * N, 2)
    for p in _factor(N):
        mu *= 1 - Fraction(1, p * p)
    cusps = Fraction(sum(_phi(d) * _phi(N // d) for d in range(1, N + 1) if N % d == 0), 2)
    g = 1 + mu / 12 - cusps / 2
    return int(g)

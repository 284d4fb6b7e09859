import json
import random
from fractions import Fraction

import numpy as np
import pytest
from mpmath import mp, mpf

from k4mod import wedge
from k4mod.mpfield import digits_to_bits
from k4mod.wedge import DenseSpace, ExpVector, MotivicCocycle, Wedge


def test_wedge_antisymmetry():
    N = 7
    a, b, c = (ExpVector.basis(x, N) for x in [(0, 1), (0, 2), (1, 3)])
    assert (wedge.wedge(a, b) + wedge.wedge(b, a)).is_zero()
    assert wedge.wedge(a, a).is_zero()
    assert (wedge.wedge(a, b, c) + wedge.wedge(b, a, c)).is_zero()
    assert (wedge.wedge(a, b, c) - wedge.wedge(b, c, a)).is_zero()


def test_expvector_folds_signs():
    N = 9
    v = ExpVector(N, [((0, 2), 1), ((0, 7), 1), ((0, 0), 5)])
    assert dict(v) == {(0, 2): 2}
    assert (v - v).is_zero()


def test_delta_is_antisymmetric_and_even():
    N = 11
    q = ((0, 1), (0, 2), (0, 4), (0, 7))
    d = wedge.delta2(q, N)
    a, b, c, e = q
    assert (wedge.delta2((b, a, c, e), N) + d).is_zero()
    assert (wedge.delta2((a, b, e, c), N) + d).is_zero()
    assert (wedge.delta2(((0, 10), b, c, e), N) - d).is_zero()
    assert wedge.delta2((a, a, c, e), N).is_zero()


def test_delta_decomposes_into_phi():
    N = 13
    rng = random.Random(2)
    idx = [(0, j) for j in range(1, N)] + [(1, j) for j in range(N)]
    for _ in range(10):
        q = rng.sample(idx, 4)
        if not wedge.units.is_distinct(q, N):
            continue
        a, b, c, d = q
        rhs = wedge.phi(a, b, c, N) + wedge.phi(c, d, a, N) + wedge.phi(b, a, d, N) + wedge.phi(d, c, b, N)
        assert (wedge.delta2(q, N) - rhs).is_zero()


@pytest.mark.parametrize("N", [5, 7, 8, 10])
def test_sparse_triangulation_gamma1(N):
    G = wedge.subgroup(N, "gamma1")
    for a in G[1:4]:
        for b in G[2:5]:
            terms = wedge.triangulate(G, a, b, N)
            assert (wedge.triangulation_image(terms, N) - wedge.manin_lhs(a, b, N)).is_zero()


def test_odd_group_uses_short_form():
    N = 9
    G = wedge.subgroup(N, "gamma1")
    terms = wedge.triangulate(G, (0, 1), (0, 4), N)
    assert all(m.denominator in (1, 3, 9) for m, _ in terms)


def test_dense_triangulation_full_group():
    for N in (4, 6):
        D = DenseSpace(N)
        G = wedge.subgroup(N, "full")
        for a in G[::5]:
            for b in G[::7]:
                assert D.check_triangulation(G, a, b)


def test_dense_space_cache_is_per_group():
    N = 6
    D = DenseSpace(N)
    a, b = (0, 1), (0, 2)
    assert D.check_triangulation(wedge.subgroup(N, "gamma1"), a, b)
    assert D.check_triangulation(wedge.subgroup(N, "full"), a, b)


def test_dense_agrees_with_sparse():
    N = 7
    D = DenseSpace(N)
    G = wedge.subgroup(N, "gamma1")
    a, b = (0, 2), (0, 3)
    lhs = wedge.manin_lhs(a, b, N)
    dense = D.lhs(a, b)
    for (x, y), c in lhs.items():
        i, j = D.index[x], D.index[y]
        pos = np.flatnonzero((D._iu[0] == i) & (D._iu[1] == j))[0]
        assert dense[pos] == c
    assert np.count_nonzero(dense) == len(lhs)


@pytest.mark.parametrize("N", [7, 11, 12])
def test_cocycle_condition(N):
    for a in range(N):
        for b in range(N):
            assert wedge.delta3(wedge.xi1(a, b, N)).is_zero()


def test_three_term_factor_cancellation():
    # sum m u ^ (1-u) = g_a ^ g_b + g_b ^ g_c + g_c ^ g_a, and that wedge (g_b / g_a) is zero
    N = 10
    for a, b in [((0, 1), (0, 3)), ((0, 2), (0, 7))]:
        c = (0, (-a[1] - b[1]) % N)
        v = ExpVector(N, [(b, 1), (a, -1)])
        ga, gb, gc = (ExpVector.basis(x, N) for x in (a, b, c))
        total = wedge.wedge(ga, gb, v) + wedge.wedge(gb, gc, v) + wedge.wedge(gc, ga, v)
        assert total.is_zero()


def test_cocycle_json_round_trip():
    xi = wedge.xi1(1, 3, 11)
    back = MotivicCocycle.from_json(json.loads(xi.dumps()))
    assert back.N == xi.N and len(back.terms) == len(xi.terms)
    for s, t in zip(xi.terms, back.terms):
        assert s.m == t.m and s.quad == t.quad and dict(s.v) == dict(t.v)
    assert wedge.delta3(back).is_zero()


def test_xi_with_equal_indices_is_trivial():
    xi = wedge.xi1(4, 4, 11)
    assert all(t.v.is_zero() for t in xi.terms)


def test_canonical_merges_terms():
    xi = wedge.xi1(1, 3, 11)
    doubled = (xi + xi).canonical()
    assert len(doubled.terms) == len(xi.canonical().terms)
    assert all(t.m == 2 * s.m for s, t in zip(xi.canonical().terms, doubled.terms))


def test_residues_level_11_trivial():
    mp.prec = digits_to_bits(40)
    for a, b in [(1, 2), (1, 3), (2, 5)]:
        for r in wedge.residues(wedge.xi1(a, b, 11)):
            for val in wedge.numeric_bloch_test(r):
                assert abs(val) < mpf(10) ** -30


def test_residue_level_15_nontrivial():
    mp.prec = digits_to_bits(40)
    worst = mpf(0)
    for a, b in [(1, 2), (1, 3), (2, 3)]:
        for r in wedge.residues(wedge.xi1(a, b, 15)):
            for val in wedge.numeric_bloch_test(r):
                worst = max(worst, abs(val))
    assert worst > mpf(10) ** -10

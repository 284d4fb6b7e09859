"""End-to-end acceptance checks A1..A10.

Each check prints one line ``A<k> PASS|FAIL <detail>``.  Run them alone with

    pytest -v -s tests/test_acceptance.py
    python tests/test_acceptance.py [A1 A5 ...]
"""

import random
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import mpmath
import pytest
from mpmath import mp, mpf

from k4mod import lfunc, modsym, regulator, units, verify, wedge
from k4mod.mpfield import digits_to_bits
from k4mod.qseries import QExpansion, truncation_order
from k4mod.wedge import ExpVector

IDENTITY = ((1, 0), (0, 1))
HERE = Path(__file__).resolve().parent

# level -> pair known to give a nonzero integral over the eigencycle
A6_PAIRS = {14: (1, 3), 15: (1, 4), 17: (1, 3), 19: (1, 4), 20: (1, 3)}


def check_a1():
    mp.prec = digits_to_bits(45)
    worst = mpf(0)
    for N in (7, 8, 11, 15):
        K = truncation_order(N, 45)
        rng = random.Random(N)
        idx = [(i, j) for i in range(N) for j in range(N) if (i, j) != (0, 0)]
        n = 0
        while n < 50:
            q = [rng.choice(idx) for _ in range(4)]
            if not units.is_distinct(q, N):
                continue
            n += 1
            u = units.CrossRatioUnit.make(q, N)
            s = units.cross_ratio_expansion(u, K) + units.cross_ratio_expansion(u.complement(), K)
            worst = max(worst, (s - QExpansion.constant(1, N, K)).max_abs())
    return worst < mpf(10) ** -40, f"max coefficient {mpmath.nstr(worst, 3)} over 200 quadruples"


def check_a2():
    checked = bad = 0
    for N in range(2, 16):
        D = wedge.DenseSpace(N)
        for kind in ["gamma1"] + (["full"] if N <= 8 else []):
            G = wedge.subgroup(N, kind)
            for a in G:
                for b in G:
                    checked += 1
                    bad += not D.check_triangulation(G, a, b)
    return bad == 0, f"{checked} pairs, {bad} failures"


def check_a3():
    checked = bad = 0
    for N in range(2, 16):
        for a in range(N):
            for b in range(N):
                checked += 1
                bad += not wedge.delta3(wedge.xi1(a, b, N)).is_zero()
                c = (-a - b) % N
                if 0 in (a, b, c):
                    continue
                xa, xb, xc = (0, a), (0, b), (0, c)
                v = ExpVector(N, [(xb, 1), (xa, -1)])
                ga, gb, gc = (ExpVector.basis(x, N) for x in (xa, xb, xc))
                total = wedge.wedge(ga, gb, v) + wedge.wedge(gb, gc, v) + wedge.wedge(gc, ga, v)
                bad += not total.is_zero()
    return bad == 0, f"{checked} cocycles, {bad} failures"


def check_a4():
    primes = [p for p in range(11, 48) if all(p % d for d in range(2, p))]
    bad = []
    for N in primes:
        d1 = units.degree(units.u1(1, 2, 3, 5, N).as_units())
        d2 = units.degree(units.u1(0, 1, 3, 4, N).as_units())
        if d1 != round(Fraction(11 * N * N, 840)) or d2 != round(Fraction(N * N, 35)):
            bad.append(N)
    return not bad, f"primes {primes[0]}..{primes[-1]}, mismatches {bad}"


def check_a5():
    mp.prec = digits_to_bits(40)
    N = 11
    K = truncation_order(N, 36)
    ex, de = regulator.Expander(N, K), regulator.DirectEvaluator(N, K)
    cycle = modsym.parse_cycle(modsym.CYCLE_11A3)
    forms = []
    for a, b in [(1, 3), (1, 2), (2, 5)]:
        for t in wedge.xi1(a, b, N).terms:
            if t.v.is_zero():
                continue
            for _, g in cycle:
                forms.append((t, g))
    forms = forms[:20]
    # beyond y = 200 both halves are below exp(-2 pi 200 / 11)
    cuts = [1, 2, 8, 40, 200]
    worst = mpf(0)
    for t, g in forms:
        val = regulator.r32_form(t, g, K, ex).integral()
        q = mpmath.quad(lambda y: de.r32(t.quad, t.v, g, y), cuts)
        q += mpmath.quad(lambda x: de.r32(t.quad, t.v, g, 1 / x) / x ** 2, cuts)
        worst = max(worst, abs(val - q))
    return len(forms) == 20 and worst < mpf(10) ** -30, f"{len(forms)} forms, max |mellin - quad| {mpmath.nstr(worst, 3)}"


def check_a6():
    digits = 30
    mp.prec = digits_to_bits(digits + 10)
    notes = []
    ok = True
    rep = verify.verify_curve(11, "11a3", "builtin", [(1, 3)], digits)
    r11 = rep[0].r if rep else None
    good = r11 is not None and abs(r11) == 3
    if good:
        diff = abs(rep[0].ratio - mpf(r11.numerator) / r11.denominator)
        good = diff < mpf(10) ** -25
    ok &= good
    notes.append(f"11a3 builtin r={r11}")
    for N, pair in A6_PAIRS.items():
        E = lfunc.curves_of_conductor(N)[0]
        rep = verify.verify_curve(N, E, "auto", [pair], digits)
        r = rep[0].r if rep else None
        ok &= r is not None and r != 0
        notes.append(f"{E.label} {pair} r={r}")
    return ok, "; ".join(notes)


def check_a7(max_mismatch=3):
    digits = 30
    mp.prec = digits_to_bits(digits + 10)
    tol = mpf(10) ** -20
    checked = 0
    bad = []
    for N in (11, 14, 15):
        reps = []
        for a in range(1, N):
            for b in range(a, N):
                reps += verify.verify_eisenstein(N, [(a, b)], digits, 20)
                checked += 1
                if not reps[-1].passed:
                    bad.append(reps[-1])
                if len([r for r in bad if r.N == N]) >= max_mismatch:
                    break
            if len([r for r in bad if r.N == N]) >= max_mismatch:
                break
    if not bad:
        return True, f"{checked} pairs within {mpmath.nstr(tol, 1)}"
    shown = ", ".join(f"N={r.N} ({r.a},{r.b}) I={mpmath.nstr(r.integral, 8)} target={mpmath.nstr(r.target, 8)}"
                      for r in bad[:4])
    return False, f"{len(bad)} mismatches in {checked} pairs checked (stops after {max_mismatch} per level): {shown}"


def check_a8():
    mp.prec = digits_to_bits(40)
    worst11 = max(verify.max_residue(wedge.xi1(a, b, 11)) for a, b in verify.all_pairs(11))
    best15 = mpf(0)
    witness = None
    for a, b in verify.all_pairs(15):
        r = verify.max_residue(wedge.xi1(a, b, 15))
        if r > best15:
            best15, witness = r, (a, b)
    ok = worst11 < mpf(10) ** -30 and best15 > mpf(10) ** -10
    return ok, f"N=11 max residue {mpmath.nstr(worst11, 3)}; N=15 {witness} residue {mpmath.nstr(best15, 5)}"


def check_a9():
    mp.prec = digits_to_bits(30)
    m = lfunc.mahler_measure_boyd()
    target = -2 * lfunc.lprime_minus1_elliptic("15a8", 25)
    d = abs(m - target)
    return d < mpf(10) ** -8, f"m={mpmath.nstr(m, 15)} -2L'={mpmath.nstr(target, 15)} diff {mpmath.nstr(d, 3)}"


def check_a10():
    cmd = [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
           str(HERE / "test_mpfield.py"), str(HERE / "test_classp.py"), str(HERE / "test_modsym.py")]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    last = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    return proc.returncode == 0, last


CHECKS = {f"A{k}": globals()[f"check_a{k}"] for k in range(1, 11)}
SLOW = {"A5", "A6", "A7"}


def run(name):
    t0 = time.time()
    saved = mp.prec
    try:
        ok, detail = CHECKS[name]()
    finally:
        mp.prec = saved
    line = f"{name} {'PASS' if ok else 'FAIL'} {detail} [{time.time() - t0:.0f}s]"
    return ok, line


@pytest.mark.parametrize("name", [pytest.param(n, marks=pytest.mark.slow) if n in SLOW else n for n in CHECKS])
def test_acceptance(name, capsys):
    ok, line = run(name)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    status = 0
    for name in sys.argv[1:] or CHECKS:
        ok, line = run(name)
        print(line, flush=True)
        status |= not ok
    sys.exit(status)

"""Command-line front end.

    k4mod units --N 11 --quad 1 2 3 5
    k4mod triangulate --N 8 --G torus
    k4mod xi --N 11 --a 1 --b 3 -o xi.json
    k4mod regulator --xi xi.json --cycle builtin --digits 30
    k4mod lvalue elliptic 11a3 --digits 40
    k4mod lvalue eis 11 1 2
    k4mod verify --N 11 --curve 11a3 --cycle builtin
    k4mod verify-eis --N 11 --pairs all

Numbers are written as decimal strings at full working precision.  The
cache directory (``--cache-dir`` or ``$K4MOD_CACHE``) stores cycle
integrals keyed by level, pair, cycle and precision.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import pickle
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import mpmath
from mpmath import mp

from . import __version__, lfunc, modsym, regulator, units, verify, wedge
from .mpfield import digits_to_bits
from .qseries import truncation_order

log = logging.getLogger("k4mod")

MAX_DIGITS = 200
MAX_LEVEL = 50
CACHE_MAGIC = b"K4MODCACHE\x01"
GROUPS = {"gamma1": "gamma1", "full": "full", "torus": "full"}


@dataclass
class RunConfig:
    N: int
    group: str = "gamma1"
    pairs: str = "all"
    digits: int = 30
    truncation: int | None = None
    cache_dir: str | None = None
    output: str | None = None

    def validate(self):
        if not 1 <= self.N <= MAX_LEVEL:
            raise SystemExit(f"level {self.N} outside 1..{MAX_LEVEL}")
        if not 5 <= self.digits <= MAX_DIGITS:
            raise SystemExit(f"digits {self.digits} outside 5..{MAX_DIGITS}")
        if self.group not in GROUPS:
            raise SystemExit(f"unknown group {self.group!r}")
        return self

    def set_precision(self):
        mp.prec = digits_to_bits(self.digits + 10)

    def K(self):
        return self.truncation or truncation_order(self.N, self.digits)


# ---------------------------------------------------------------------------
# cache


class ResultCache:
    """Pickled values under a versioned header; unreadable files are ignored."""

    def __init__(self, root):
        self.root = Path(root) if root else None
        if self.root:
            self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, key):
        h = hashlib.sha256(repr(key).encode()).hexdigest()[:32]
        return self.root / f"{h}.bin"

    def get(self, key):
        if not self.root:
            return None
        p = self._path(key)
        try:
            data = p.read_bytes()
        except OSError:
            return None
        if not data.startswith(CACHE_MAGIC):
            return None
        try:
            stored_key, value = pickle.loads(data[len(CACHE_MAGIC):])
        except Exception:
            return None
        return value if stored_key == key else None

    def put(self, key, value):
        if not self.root:
            return
        tmp = self._path(key).with_suffix(".tmp")
        tmp.write_bytes(CACHE_MAGIC + pickle.dumps((key, value)))
        tmp.replace(self._path(key))


def _cache_dir(args):
    return getattr(args, "cache_dir", None) or os.environ.get("K4MOD_CACHE")


# ---------------------------------------------------------------------------
# output helpers


def _num(x, digits):
    return mpmath.nstr(x, digits + 5, strip_zeros=False)


def _emit(obj, path=None):
    text = json.dumps(obj, indent=1, default=str)
    if path:
        Path(path).write_text(text + "\n")
    else:
        print(text)


def _load_cycle(spec, N, curve=None):
    if spec in ("builtin", "auto", None):
        E = lfunc.elliptic_curve(curve) if curve else (lfunc.curves_of_conductor(N) or [None])[0]
        return verify.resolve_cycle(spec or "auto", N, E)
    if spec.endswith(".json"):
        return modsym.Cycle.from_json(json.loads(Path(spec).read_text()))
    return modsym.import_cycle(spec)


# ---------------------------------------------------------------------------
# commands


def cmd_units(args):
    N = args.N
    if len(args.quad) != 4:
        raise SystemExit("--quad needs four residues a b c d")
    u = units.u1(*args.quad, N)
    v = u.as_units()
    cusps = units.order_at_cusps(v)
    out = {
        "N": N,
        "quadruple": [list(x) for x in u.quad],
        "siegel_exponents": [[list(x), str(e)] for x, e in v.exps],
        "theta": str(v.theta),
        "degree": str(units.degree(v)),
        "orders": [{"cusp": c["repr"], "width": c["width"], "order": str(c["order"])} for c in cusps],
    }
    if args.terms:
        with mp.workprec(digits_to_bits(args.digits)):
            s = units.unit_expansion(v, args.terms)
            out["q_expansion"] = {"mu": str(s.mu), "val": s.val,
                                  "coeffs": [_num(c, args.digits) for c in s.coeffs()]}
    _emit(out, args.output)
    return 0


def cmd_triangulate(args):
    N = args.N
    kind = GROUPS[args.G]
    G = wedge.subgroup(N, kind)
    pairs = [(tuple(args.a), tuple(args.b))] if args.a and args.b else [(a, b) for a in G for b in G]
    dense = wedge.DenseSpace(N)
    failures = []
    for a, b in pairs:
        if not dense.check_triangulation(G, a, b):
            failures.append([list(a), list(b)])
    out = {"N": N, "G": kind, "pairs_checked": len(pairs), "failures": failures, "pass": not failures}
    if args.show and len(pairs) == 1:
        a, b = pairs[0]
        out["terms"] = [[str(m), [list(x) for x in q]] for m, q in wedge.triangulate(G, a, b, N)]
    _emit(out, args.output)
    return 0 if not failures else 1


def cmd_xi(args):
    kind = GROUPS[args.G]
    a = args.a if kind == "gamma1" else tuple(args.a2)
    b = args.b if kind == "gamma1" else tuple(args.b2)
    xi = wedge.build_xi(kind, a, b, args.N)
    data = xi.to_json()
    data["delta_is_zero"] = wedge.delta3(xi).is_zero()
    _emit(data, args.output)
    return 0 if data["delta_is_zero"] else 1


def cmd_regulator(args):
    xi = wedge.MotivicCocycle.from_json(json.loads(Path(args.xi).read_text()))
    cfg = RunConfig(xi.N, digits=args.digits, truncation=args.truncation).validate()
    cfg.set_precision()
    cycle = _load_cycle(args.cycle, xi.N, args.curve)
    K = cfg.K()
    ex = regulator.Expander(xi.N, K)
    res = regulator.integrate_cycle(xi, cycle, n=args.weight, K=K, per_term=args.per_term, expander=ex)
    out = {
        "N": xi.N, "a": list(xi.a), "b": list(xi.b), "digits": cfg.digits, "K": K,
        "value": _num(res.value, cfg.digits),
        "imag_residual": _num(res.imag_residual, 5),
        "error_bound": mpmath.nstr(res.tail_bound, 5),
        "per_term": [{"m": str(r["m"]), "quadruple": [list(x) for x in r["quadruple"]],
                      "integral": _num(r["integral"], cfg.digits)} for r in res.per_term],
    }
    _emit(out, args.output)
    return 0


def cmd_lvalue(args):
    mp.prec = digits_to_bits(args.digits + 10)
    if args.kind == "elliptic":
        E = lfunc.elliptic_curve(args.args[0])
        d = lfunc.elliptic_l_data(E, args.digits)
        out = {"curve": E.label, "conductor": E.conductor, "root_number": d.root_number,
               "L3": _num(d.L3, args.digits), "lprime_minus1": _num(d.lprime_minus1, args.digits)}
    else:
        if len(args.args) != 3:
            raise SystemExit("usage: lvalue eis N a b")
        N, a, b = (int(x) for x in args.args)
        lp = lfunc.lprime_minus1_eisenstein(a, b, N, digits=args.digits)
        out = {"N": N, "a": a, "b": b, "lprime_minus1": _num(lp, args.digits),
               "target": _num(-6 * mp.pi ** 2 / N * lp, args.digits)}
    _emit(out, args.output)
    return 0


def _cached_integrals(cache, N, cycle, digits, pairs, compute):
    key_cycle = json.dumps(cycle.to_json(), sort_keys=True)
    out = []
    for a, b in pairs:
        key = ("cycle-integral", __version__, N, a, b, key_cycle, digits)
        val = cache.get(key)
        if val is None:
            val = compute(a, b)
            cache.put(key, val)
        out.append(val)
    return out


def cmd_verify(args):
    cfg = RunConfig(args.N, pairs=args.pairs, digits=args.digits, cache_dir=_cache_dir(args),
                    output=args.output).validate()
    cfg.set_precision()
    E = lfunc.elliptic_curve(args.curve) if args.curve else lfunc.curves_of_conductor(cfg.N)[0]
    cycle = _load_cycle(args.cycle, cfg.N, E.label)
    pairs = verify.parse_pairs(cfg.pairs, cfg.N)
    cache = ResultCache(cfg.cache_dir)

    def show(rep):
        log.info("N=%d (%d,%d) ratio=%s r=%s", rep.N, rep.a, rep.b, mpmath.nstr(rep.ratio, 20), rep.r)

    reports = []
    for a, b in pairs:
        key = ("verify", __version__, cfg.N, E.label, a, b, json.dumps(cycle.to_json()), cfg.digits)
        rep = cache.get(key)
        if rep is None:
            got = verify.verify_curve(cfg.N, E, cycle, [(a, b)], cfg.digits, log=show)
            rep = got[0] if got else None
            cache.put(key, rep if rep is not None else "skipped")
        if rep is None or rep == "skipped":
            continue
        reports.append(rep)
        if args.first and rep.passed:
            break
    ok = any(r.passed for r in reports)
    _emit({"N": cfg.N, "curve": E.label, "cycle": cycle.to_json(), "digits": cfg.digits,
           "reports": [r.to_json(cfg.digits) for r in reports], "pass": ok}, cfg.output)
    return 0 if ok else 1


def cmd_verify_eis(args):
    cfg = RunConfig(args.N, pairs=args.pairs, digits=args.digits, output=args.output).validate()
    cfg.set_precision()
    pairs = verify.parse_pairs(cfg.pairs, cfg.N)
    reps = verify.verify_eisenstein(cfg.N, pairs, cfg.digits, args.tol_digits)
    ok = all(r.passed for r in reps)
    _emit({"N": cfg.N, "digits": cfg.digits, "reports": [r.to_json(cfg.digits) for r in reps], "pass": ok},
          cfg.output)
    return 0 if ok else 1


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="k4mod", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("units", help="divisor and expansion of u_1(a,b,c,d)")
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--quad", type=int, nargs=4, required=True)
    s.add_argument("--terms", type=int, default=0, help="number of q^(1/N) coefficients to print")
    s.add_argument("--digits", type=int, default=20)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_units)

    s = sub.add_parser("triangulate", help="exact check of the triangulation identity")
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--G", default="gamma1", choices=sorted(GROUPS))
    s.add_argument("--a", type=int, nargs=2)
    s.add_argument("--b", type=int, nargs=2)
    s.add_argument("--show", action="store_true", help="print the terms (single pair only)")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_triangulate)

    s = sub.add_parser("xi", help="build the cocycle xi(a,b) as JSON")
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--G", default="gamma1", choices=sorted(GROUPS))
    s.add_argument("--a", type=int, default=1)
    s.add_argument("--b", type=int, default=2)
    s.add_argument("--a2", type=int, nargs=2, help="index a for the full group")
    s.add_argument("--b2", type=int, nargs=2, help="index b for the full group")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_xi)

    s = sub.add_parser("regulator", help="integrate r_n(2) of a cocycle over a cycle")
    s.add_argument("--xi", required=True, help="cocycle JSON from the xi command")
    s.add_argument("--cycle", default="auto", help="'builtin', 'auto' or a cycle file")
    s.add_argument("--curve", help="curve label for --cycle auto")
    s.add_argument("--digits", type=int, default=30)
    s.add_argument("--truncation", type=int)
    s.add_argument("--weight", type=int, default=3)
    s.add_argument("--per-term", action="store_true")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_regulator)

    s = sub.add_parser("lvalue", help="L'(-1) of an elliptic curve or Eisenstein product")
    s.add_argument("kind", choices=["elliptic", "eis"])
    s.add_argument("args", nargs="+")
    s.add_argument("--digits", type=int, default=40)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_lvalue)

    s = sub.add_parser("verify", help="regulator integrals against (pi^2/N) L'(E,-1)")
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--curve")
    s.add_argument("--cycle", default="auto")
    s.add_argument("--pairs", default="all", help="'all' or 'a,b a,b ...'")
    s.add_argument("--digits", type=int, default=30)
    s.add_argument("--first", action="store_true", help="stop at the first recognized pair")
    s.add_argument("--cache-dir")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("verify-eis", help="{0,oo} integrals against -(6 pi^2/N) L'(s_a s_b,-1)")
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--pairs", default="all")
    s.add_argument("--digits", type=int, default=30)
    s.add_argument("--tol-digits", type=int, default=20)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_verify_eis)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

"""Fixed-point integer series kernels.

A real series is a list of Python ints, each the coefficient scaled by 2**W.
Complex series are (re, im) pairs of such lists.  Products go through
Kronecker substitution so that one big-integer multiplication (gmpy2 when
available) replaces the O(K^2) coefficient loop.
"""

from __future__ import annotations

try:
    import gmpy2

    _mpz = gmpy2.mpz
except ImportError:  # pragma: no cover
    gmpy2 = None
    _mpz = int

GUARD_BITS = 32


def _pack(a, nb):
    pos = b"".join((x if x > 0 else 0).to_bytes(nb, "little") for x in a)
    neg = b"".join((-x if x < 0 else 0).to_bytes(nb, "little") for x in a)
    return int.from_bytes(pos, "little") - int.from_bytes(neg, "little")


def conv_raw(a, b, n):
    """First n coefficients of the exact integer convolution a*b."""
    if n <= 0:
        return []
    a = a[:n]
    b = b[:n]
    if not a or not b:
        return [0] * n
    ma = max(abs(x) for x in a).bit_length()
    mb = max(abs(x) for x in b).bit_length()
    if ma == 0 or mb == 0:
        return [0] * n
    nfull = len(a) + len(b) - 1
    nbits = ma + mb + min(len(a), len(b)).bit_length() + 2
    nb = (nbits + 7) // 8
    half = 1 << (8 * nb - 1)
    bias = int.from_bytes(half.to_bytes(nb, "little") * nfull, "little")
    z = int(_mpz(_pack(a, nb)) * _mpz(_pack(b, nb))) + bias
    raw = z.to_bytes((z.bit_length() + 7) // 8 + nb, "little")
    m = min(nfull, n)
    out = [int.from_bytes(raw[i * nb:(i + 1) * nb], "little") - half for i in range(m)]
    out.extend([0] * (n - m))
    return out


def conv_naive(a, b, n):
    """Reference O(n^2) convolution, used as a test oracle."""
    out = [0] * n
    for i, x in enumerate(a[:n]):
        if x:
            for j, y in enumerate(b[: n - i]):
                out[i + j] += x * y
    return out


def rshift_round(x, w):
    if w <= 0:
        return x << -w
    return (x + (1 << (w - 1))) >> w


def mul(a, b, n, w):
    """Truncated product of two real fixed-point series at scale 2**w."""
    return [rshift_round(c, w) for c in conv_raw(a, b, n)]


def cmul(ar, ai, br, bi, n, w):
    """Truncated complex product with three real convolutions."""
    s1 = [x + y for x, y in zip(ar, ai)]
    k1 = conv_raw(br, s1, n)
    k2 = conv_raw(ar, [y - x for x, y in zip(br, bi)], n)
    k3 = conv_raw(ai, [x + y for x, y in zip(br, bi)], n)
    re = [rshift_round(p - r, w) for p, r in zip(k1, k3)]
    im = [rshift_round(p + q, w) for p, q in zip(k1, k2)]
    return re, im


def _pad(a, n):
    a = list(a[:n])
    a.extend([0] * (n - len(a)))
    return a


def cinv(ar, ai, n, w):
    """Inverse of a complex series whose constant term is exactly 1 (= 2**w)."""
    one = 1 << w
    if ar[0] != one or ai[0] != 0:
        raise ValueError("cinv expects constant term 1")
    gr, gi = [one], [0]
    m = 1
    while m < n:
        m = min(2 * m, n)
        fr, fi = _pad(ar, m), _pad(ai, m)
        gr, gi = _pad(gr, m), _pad(gi, m)
        er, ei = cmul(fr, fi, gr, gi, m, w)
        er = [-x for x in er]
        ei = [-x for x in ei]
        er[0] += 2 * one
        gr, gi = cmul(gr, gi, er, ei, m, w)
    return _pad(gr, n), _pad(gi, n)


def cderiv(ar, ai):
    """Coefficients of q*d/dq (index-weighted)."""
    return [k * x for k, x in enumerate(ar)], [k * x for k, x in enumerate(ai)]


def _div_round(x, k):
    q, r = divmod(x, k)
    return q + (1 if 2 * r >= k else 0)


def clog(ar, ai, n, w):
    """log of a series with constant term 1; the result has zero constant term."""
    ir, ii = cinv(ar, ai, n, w)
    dr, di = cderiv(ar, ai)
    pr, pi = cmul(dr, di, ir, ii, n, w)
    re = [0] + [_div_round(pr[k], k) for k in range(1, n)]
    im = [0] + [_div_round(pi[k], k) for k in range(1, n)]
    return re, im


def cexp(gr, gi, n, w):
    """exp of a series with zero constant term, by Newton iteration."""
    if gr and (gr[0] != 0 or gi[0] != 0):
        raise ValueError("cexp expects zero constant term")
    one = 1 << w
    fr, fi = [one], [0]
    m = 1
    while m < n:
        m = min(2 * m, n)
        fr, fi = _pad(fr, m), _pad(fi, m)
        lr, li = clog(fr, fi, m, w)
        hr = [x - y for x, y in zip(_pad(gr, m), lr)]
        hi = [x - y for x, y in zip(_pad(gi, m), li)]
        hr[0] += one
        fr, fi = cmul(fr, fi, hr, hi, m, w)
    return _pad(fr, n), _pad(fi, n)

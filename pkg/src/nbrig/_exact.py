"""
Extended-precision kernels for the alternating-sign formulas.

Both the closed-form PMF (a binomial alternating sum of mgf values) and the
shift recursions lose roughly ``log2(sum |terms| / result)`` bits to
cancellation.  Each kernel here runs in a private gmpy2 context, tracks a
rigorous-in-spirit magnitude bound alongside the value, and raises its
working precision until every output carries about ``TARGET_BITS`` correct
bits.
"""

from __future__ import annotations

import math
from collections.abc import Sequence

import gmpy2
from gmpy2 import mpfr

from .errors import PrecisionLossError
from .rig import rig_log_mgf_mpfr

TARGET_BITS = 56
MAX_PRECISION = 1 << 16

_GUARD_BITS = 16


def _seeds(r: float, alpha: float, m: float, count: int):
    """``M(-(r + j))`` for ``j = 0..count-1`` and the largest ``|log M|``."""
    a, mm = mpfr(alpha), mpfr(m)
    out, big = [], 0.0
    for j in range(count):
        lm = rig_log_mgf_mpfr(-(mpfr(r) + j), a, mm)
        big = max(big, abs(float(lm)))
        out.append(gmpy2.exp(lm))
    return out, big


def _bits_short(values, bounds) -> float:
    """Bits missing for the worst entry; 0 when every entry meets the target."""
    worst = 0.0
    for v, b in zip(values, bounds):
        if b == 0:
            continue
        if v <= 0:
            return math.inf
        rel = float(gmpy2.log2(b) - gmpy2.log2(v))
        worst = max(worst, rel + TARGET_BITS)
    return worst


def shifted_recursion(r: float, alpha: float, m: float, severity: Sequence[float], x_max: int):
    """
    Aggregate probabilities ``g(x; r)`` for ``x = 0..x_max``.

    ``severity[y]`` is the claim-size mass at ``y`` (``severity[0]`` must be
    zero).  The recursion

        g(x; s) = sum_y ((s y + x - y) / x) f(y) g(x - y; s)
                - sum_y (s y / x) f(y) g(x - y; s + 1)

    is applied on the triangle ``{(x, s = r + j) : x + j <= x_max}`` seeded
    by ``g(0; r + j) = M(-(r + j))``.  With ``severity = [0, 1]`` it is the
    claim-count recursion itself.

    Returns ``(values, precision)`` with values as ``mpfr`` at the final
    working precision.
    """
    fy = [(y, float(v)) for y, v in enumerate(severity) if y >= 1 and v != 0.0]
    prec = 64 + 2 * x_max
    while True:
        with gmpy2.context(precision=prec):
            vals, mags, big = _triangle(r, alpha, m, fy, x_max)
            scale = gmpy2.exp2(-prec)
            bounds = [(8 * (x + 1) + big + 4) * g * scale for x, g in enumerate(mags)]
            short = _bits_short(vals, bounds)
            if short <= 0:
                return vals, prec
        if prec >= MAX_PRECISION:
            raise PrecisionLossError(
                f"shift recursion did not reach {TARGET_BITS} bits at {prec}-bit precision (x_max={x_max})"
            )
        step = 2 * x_max + 64 if math.isinf(short) else math.ceil(short) + _GUARD_BITS
        prec = min(MAX_PRECISION, prec + step)


def _triangle(r, alpha, m, fy, x_max):
    seeds, big = _seeds(r, alpha, m, x_max + 1)
    # level j holds g(x; r + j) for x = 0..x_max - j; start at the top
    upper, upper_mag = [seeds[x_max]], [seeds[x_max]]
    rr = mpfr(r)
    for j in range(x_max - 1, -1, -1):
        s = rr + j
        cur, cur_mag = [seeds[j]], [seeds[j]]
        for x in range(1, x_max - j + 1):
            acc = mpfr(0)
            mag = mpfr(0)
            for y, f in fy:
                if y > x:
                    break
                a = (s * y + (x - y)) / x * f * cur[x - y]
                b = s * y / x * f * upper[x - y]
                acc += a - b
                mag += (s * y + (x - y)) / x * f * cur_mag[x - y] + s * y / x * f * upper_mag[x - y]
            cur.append(acc)
            cur_mag.append(mag)
        upper, upper_mag = cur, cur_mag
    return upper, upper_mag, big


def alternating_sum(x: int, r: float, alpha: float, m: float, max_precision: int = MAX_PRECISION):
    """
    ``S = sum_j C(x, j) (-1)^j M(-(r + j))`` in extended precision.

    Returns ``(log S, relative error bound)`` as floats; ``log S`` is
    ``nan`` when even ``max_precision`` bits left the sign undetermined.
    """
    prec = 64 + x
    while True:
        prec = min(prec, max_precision)
        with gmpy2.context(precision=prec):
            a, mm, rr = mpfr(alpha), mpfr(m), mpfr(r)
            terms, mag, big = [], mpfr(0), 0.0
            for j in range(x + 1):
                lm = rig_log_mgf_mpfr(-(rr + j), a, mm)
                big = max(big, abs(float(lm)))
                t = gmpy2.comb(x, j) * gmpy2.exp(lm)
                mag += t
                terms.append(-t if j % 2 else t)
            s = gmpy2.fsum(terms)
            err = (2 * (x + 1) + big + 4) * mag * gmpy2.exp2(-prec)
            if s > 0 and err < s:
                rel = float(err / s)
                if rel <= 2.0 ** -TARGET_BITS or prec >= max_precision:
                    return float(gmpy2.log(s)), rel
                short = math.log2(rel) + TARGET_BITS
            else:
                if prec >= max_precision:
                    return math.nan, math.inf
                short = math.inf
        step = x + 64 if math.isinf(short) else math.ceil(short) + _GUARD_BITS
        prec += step

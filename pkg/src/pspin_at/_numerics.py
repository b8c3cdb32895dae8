"""Small scalar routines shared across modules."""
from __future__ import annotations

import math

INVPHI = (math.sqrt(5) - 1) / 2
EPS = 2.220446049250313e-16


def golden_section(f, a: float, b: float, xtol: float = 1e-10, maxiter: int = 200):
    """Minimise a unimodal ``f`` on ``[a, b]``; the endpoints are also compared.

    An endpoint wins ties within a few ulps, since interior points closer to
    it than rounding can resolve carry no information.  Returns ``(x, f(x))``.
    """
    ends = [(a, f(a)), (b, f(b))]
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(maxiter):
        if b - a <= xtol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INVPHI * (b - a)
            fd = f(d)
    best = min([(c, fc), (d, fd)], key=lambda t: t[1])
    tie = 8 * EPS * max(1.0, abs(best[1]))
    near = [e for e in ends if e[1] <= best[1] + tie]
    return min(near, key=lambda t: t[1]) if near else best


def bisect_root(f, a: float, b: float, xtol: float = 1e-14, maxiter: int = 200) -> float:
    """Bisection on a sign change of ``f`` over ``[a, b]``."""
    fa, fb = f(a), f(b)
    if fa == 0:
        return a
    if fb == 0:
        return b
    if fa * fb > 0:
        raise ValueError("no sign change on bracket")
    for _ in range(maxiter):
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0 or b - a <= xtol:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)

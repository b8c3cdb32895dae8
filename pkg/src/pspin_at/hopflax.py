"""Hopf-Lax upper bound on the zero-field free energy and counterexample search.

The bound reads

    lim F_N(beta, 0) <= t xi0(1) - F1(l) + t xi0*(l / t)     for every l >= 0,

with ``t = beta**2 / 2``, ``F1(l) = -E log cosh(sqrt(2l) Z) + l`` the enriched
free energy of a single spin, and ``xi0*`` the convex conjugate over
``r >= 0``.  Whenever the minimum over ``l`` falls strictly below
``t xi0(1)`` (the value of the Dirac measure at zero), the model is not
replica symmetric at ``(beta, 0)``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from . import quad
from ._numerics import golden_section
from .errors import BracketError, PreconditionError
from .mixture import CouplingParams, MixtureSpec, conjugate, xi0
from .parisi import RS_GAP_TOL, GapReport, rs_gap
from .rs_at import ATReport, alpha

L_MIN, L_MAX, L_POINTS = 1e-6, 10.0, 200
CERT_MARGIN = 1e-3
BISECT_WIDTH = 1e-3


def _x2_minus_logcosh(x):
    """``x**2/2 - log cosh x`` without cancellation near zero."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-2
    x2 = x * x
    series = x2 * x2 * (1 / 12 - x2 / 45 + 17 * x2 * x2 / 2520)
    return np.where(small, series, 0.5 * x2 - quad.log_cosh(x))


def enriched_f1(l: float) -> float:
    """Single-spin enriched free energy ``-E log cosh(sqrt(2l) Z) + l``.

    Computed as ``E[s^2 Z^2/2 - log cosh(s Z)]`` with ``s = sqrt(2l)``, which
    is non-negative term by term and behaves like ``l**2`` as ``l -> 0``.
    """
    if not l >= 0:
        raise PreconditionError(f"l must be >= 0, got {l}")
    s = math.sqrt(2 * l)
    g = quad.gaussian_rule(s)
    return float(_x2_minus_logcosh(s * g.nodes) @ g.weights)


def hopflax_bound(spec: MixtureSpec, params: CouplingParams, l: float) -> float:
    """``t xi0(1) - F1(l) + t xi0*(l/t)`` at a single ``l``."""
    t = params.t
    if not t > 0:
        raise PreconditionError("Hopf-Lax bound needs beta > 0")
    if not l >= 0:
        raise PreconditionError(f"l must be >= 0, got {l}")
    return t * float(xi0(spec, 1.0)) - enriched_f1(l) + t * conjugate(spec, l / t)[0]


@dataclass(frozen=True)
class BoundReport:
    t: float
    l_grid: list[tuple[float, float]]
    best_l: float
    best_bound: float
    rs_value: float
    margin: float

    def to_json(self) -> dict:
        return asdict(self)


def best_bound(spec, params, l_min=L_MIN, l_max=L_MAX, n=L_POINTS) -> BoundReport:
    """Minimise the bound over ``l``: ``l = 0`` plus a log grid, then golden section."""
    if not params.beta > 0:
        raise PreconditionError("best_bound needs beta > 0")
    ls = np.r_[0.0, np.geomspace(l_min, l_max, n)]
    vals = [hopflax_bound(spec, params, float(l)) for l in ls]
    i = int(np.argmin(vals))
    lo, hi = ls[max(i - 1, 0)], ls[min(i + 1, len(ls) - 1)]
    l_best, b_best = golden_section(lambda l: hopflax_bound(spec, params, l), lo, hi, xtol=1e-12 * max(hi, 1e-6))
    if vals[i] < b_best:
        l_best, b_best = ls[i], vals[i]
    rs_value = params.t * float(xi0(spec, 1.0))
    return BoundReport(
        t=params.t,
        l_grid=[(float(l), float(v)) for l, v in zip(ls, vals)],
        best_l=float(l_best),
        best_bound=float(b_best),
        rs_value=rs_value,
        margin=rs_value - float(b_best),
    )


class CounterexampleResult(NamedTuple):
    """Outcome of :func:`counterexample_search`.

    When ``found`` is false the remaining report fields are ``None`` and
    ``best_margin`` carries the largest margin seen on the grid.
    """

    found: bool
    c_min: float | None
    spec: MixtureSpec | None
    certificate: BoundReport | None
    at_report: ATReport | None
    gap_report: GapReport | None
    best_margin: float


def counterexample_search(
    beta: float,
    p: int = 4,
    c_grid=(5, 10, 20, 40, 80),
    cert_margin: float = CERT_MARGIN,
    k_max: int = 1,
    seed: int = 0,
) -> CounterexampleResult:
    """Smallest ``C`` on ``c_grid`` for which ``r**2/2 + (C r)**p / p`` is certified non-RS at ``(beta, 0)``.

    The certified model also gets its AT report and its k-RSB gap, which
    together witness a point inside the AT region but outside the RS region.
    """
    if not 0 < beta < 1:
        raise PreconditionError(f"beta must lie in (0, 1), got {beta}")
    if p < 4 or p % 2:
        raise PreconditionError(f"p must be an even integer >= 4, got {p}")
    cs = [float(c) for c in c_grid]
    if not cs or any(b <= a for a, b in zip(cs, cs[1:])):
        raise PreconditionError("c_grid must be non-empty and increasing")

    params = CouplingParams(beta, 0.0)
    best_margin = -math.inf
    for c in cs:
        spec = MixtureSpec.sk_plus_p(p, c)
        rep = best_bound(spec, params)
        best_margin = max(best_margin, rep.margin)
        if rep.margin > cert_margin:
            at = alpha(spec, params)
            gap = rs_gap(spec, params, k_max=k_max, seed=seed)
            return CounterexampleResult(True, c, spec, rep, at, gap, best_margin)
    return CounterexampleResult(False, None, None, None, None, None, best_margin)


def beta_c_bisect(
    spec: MixtureSpec,
    bracket: tuple[float, float],
    h: float = 0.0,
    k_max: int = 1,
    width: float = BISECT_WIDTH,
    seed: int = 0,
    tol: float = RS_GAP_TOL,
    n_starts: int = 12,
) -> float:
    """Bisection for the largest ``beta`` judged replica symmetric by :func:`rs_gap`.

    Raises:
        BracketError: unless ``bracket[0]`` is RS and ``bracket[1]`` is not.
    """
    lo, hi = map(float, bracket)
    if not 0 <= lo < hi:
        raise BracketError(f"invalid bracket {bracket}")
    is_rs = lambda b: rs_gap(spec, CouplingParams(b, h), k_max, tol, n_starts, seed).rs_member
    if not is_rs(lo):
        raise BracketError(f"lower end beta={lo} is not replica symmetric")
    if is_rs(hi):
        raise BracketError(f"upper end beta={hi} is replica symmetric")
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if is_rs(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)

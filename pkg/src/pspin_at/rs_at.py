"""Replica-symmetric functional, its fixed points and the generalized AT statistic.

Throughout, the Gaussian field at overlap ``q`` is ``beta*sqrt(xi0'(q))*Z + h``,
so that stationary points of the RS functional solve the same self-consistency
equation that defines the fixed-point set.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from . import quad
from ._numerics import bisect_root, golden_section
from .errors import PreconditionError
from .mixture import CouplingParams, MixtureSpec, xi0, xi0_d1, xi0_d2

GRID_POINTS = 2001
ROOT_TOL = 1e-10
TANGENT_TOL = 1e-8
SEP_TOL = 1e-4
VALUE_TOL = 1e-9
FD_STEP = 1e-4


def _field_scale(spec, params, q):
    return params.beta * np.sqrt(np.maximum(xi0_d1(spec, q), 0.0))


def _gauss_mean(fn, scale, h, order):
    """``E fn(scale*Z + h)`` for every entry of ``scale`` (vectorised).

    ``order=None`` selects :func:`quad.gaussian_rule` for the largest scale;
    an integer selects Gauss-Hermite of that order.
    """
    s = np.asarray(scale, dtype=float)
    g = quad.gaussian_rule(float(np.max(s, initial=0.0))) if order is None else quad._as_rule(order)
    vals = fn(s[..., None] * g.nodes + h)
    return vals @ g.weights


def _check_q(q):
    qa = np.asarray(q, dtype=float)
    if np.any(qa < 0) or np.any(qa > 1) or np.any(~np.isfinite(qa)):
        raise PreconditionError("overlap q must lie in [0, 1]")
    return qa


def _scalar_or_array(x, like):
    return float(x) if np.ndim(like) == 0 else x


def f_rs(spec: MixtureSpec, params: CouplingParams, q, order=None):
    """RS functional ``E log cosh(beta sqrt(xi0'(q)) Z + h) + t (xi0(1) - xi0(q) - (1-q) xi0'(q))``.

    Accepts scalar or array ``q``.
    """
    qa = _check_q(q)
    ent = _gauss_mean(quad.log_cosh, _field_scale(spec, params, qa), params.h, order)
    pen = params.t * (xi0(spec, 1.0) - xi0(spec, qa) - (1 - qa) * xi0_d1(spec, qa))
    return _scalar_or_array(ent + pen, q)


def fixed_point_residual(spec, params, q, order=None):
    """``E tanh^2(beta sqrt(xi0'(q)) Z + h) - q``; its zeros form the set Q*."""
    qa = _check_q(q)
    m = _gauss_mean(lambda x: np.tanh(x) ** 2, _field_scale(spec, params, qa), params.h, order)
    return _scalar_or_array(m - qa, q)


def alpha_at(spec: MixtureSpec, params: CouplingParams, q, order=None):
    """Stability statistic ``beta^2 xi0''(q) E sech^4(beta sqrt(xi0'(q)) Z + h)``."""
    qa = _check_q(q)
    m = _gauss_mean(lambda x: quad.sech(x) ** 4, _field_scale(spec, params, qa), params.h, order)
    return _scalar_or_array(params.beta**2 * xi0_d2(spec, qa) * m, q)


def qstar_set(spec, params, grid_points: int = GRID_POINTS, order=None) -> list[float]:
    """All fixed points of ``q = E tanh^2(...)`` on ``[0, 1]``, sorted.

    Sign changes of the residual on a uniform grid are refined by bisection;
    tangential roots are picked up as local minima of ``|residual|`` below
    ``TANGENT_TOL``.  Roots closer than ``1e-8`` are reported once.
    """
    grid = np.linspace(0.0, 1.0, grid_points)
    phi = fixed_point_residual(spec, params, grid, order)
    res = lambda q: fixed_point_residual(spec, params, q, order)

    roots = list(grid[phi == 0])
    for i in np.flatnonzero(phi[:-1] * phi[1:] < 0):
        roots.append(bisect_root(res, grid[i], grid[i + 1]))

    a = np.abs(phi)
    left = np.r_[np.inf, a[:-1]]
    right = np.r_[a[1:], np.inf]
    for i in np.flatnonzero((a <= left) & (a <= right) & (a < TANGENT_TOL) & (a > 0)):
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid_points - 1)]
        q, v = golden_section(lambda x: abs(res(x)), lo, hi, xtol=1e-13)
        if v <= TANGENT_TOL:
            roots.append(q)

    roots.sort()
    out: list[float] = []
    for r in roots:
        if not out or r - out[-1] > 1e-8:
            out.append(float(r))
    return out


class RSMinimum(NamedTuple):
    minimizers: list[float]
    value: float
    unique: bool


def rs_minimize(
    spec,
    params,
    grid_points: int = GRID_POINTS,
    value_tol: float = VALUE_TOL,
    sep_tol: float = SEP_TOL,
    order=None,
) -> RSMinimum:
    """Global minimum of ``q -> f_rs(q)`` over ``[0, 1]``.

    Every grid-local minimum is refined by golden section; refined minima within
    ``value_tol`` of the best are kept and clustered at resolution ``sep_tol``.
    A run of three or more exactly equal grid values is treated as a plateau
    and contributes its two endpoints.
    """
    grid = np.linspace(0.0, 1.0, grid_points)
    f = f_rs(spec, params, grid, order)
    fn = lambda q: f_rs(spec, params, q, order)

    left = np.r_[np.inf, f[:-1]]
    right = np.r_[f[1:], np.inf]
    cand = np.flatnonzero((f <= left) & (f <= right))

    found: list[tuple[float, float]] = []
    runs = np.split(cand, np.flatnonzero(np.diff(cand) > 1) + 1)
    for run in runs:
        if len(run) >= 3:
            found += [(grid[run[0]], f[run[0]]), (grid[run[-1]], f[run[-1]])]
            continue
        lo = grid[max(run[0] - 1, 0)]
        hi = grid[min(run[-1] + 1, grid_points - 1)]
        found.append(golden_section(fn, lo, hi, xtol=1e-10))

    best = min(v for _, v in found)
    keep = sorted(q for q, v in found if v <= best + value_tol)
    clusters: list[float] = []
    for q in keep:
        if not clusters or q - clusters[-1] > sep_tol:
            clusters.append(float(q))
    return RSMinimum(clusters, float(best), len(clusters) == 1)


def f_rs_d2(spec, params, q: float, step: float = FD_STEP, order=None) -> float:
    """Second ``q``-derivative of ``f_rs`` by Richardson-extrapolated differences.

    Central differences in the interior; one-sided (forward at the left edge,
    backward at the right) when ``q -+ step`` leaves ``[0, 1]``.
    """
    _check_q(q)
    fn = lambda x: f_rs(spec, params, x, order)
    if q - step < 0:
        d = lambda h: (fn(q) - 2 * fn(q + h) + fn(q + 2 * h)) / h**2
        return 2 * d(step / 2) - d(step)
    if q + step > 1:
        d = lambda h: (fn(q) - 2 * fn(q - h) + fn(q - 2 * h)) / h**2
        return 2 * d(step / 2) - d(step)
    d = lambda h: (fn(q + h) - 2 * fn(q) + fn(q - h)) / h**2
    return (4 * d(step / 2) - d(step)) / 3


@dataclass(frozen=True)
class ATReport:
    roots: list[tuple[float, float]]
    alpha_min: float
    at_member: bool
    rs_minimizers: list[float]
    alpha_at_rs_min: float

    def to_json(self) -> dict:
        return asdict(self)


def alpha(spec, params, grid_points: int = GRID_POINTS, order=None, rs_min: RSMinimum | None = None) -> ATReport:
    """Fixed points, per-root AT statistic, AT verdict and the RS-minimiser variant."""
    roots = qstar_set(spec, params, grid_points, order)
    alphas = [float(alpha_at(spec, params, q, order)) for q in roots]
    amin = min(alphas)
    if rs_min is None:
        rs_min = rs_minimize(spec, params, grid_points, order=order)
    a_rs = min(float(alpha_at(spec, params, q, order)) for q in rs_min.minimizers)
    return ATReport(
        roots=list(zip(roots, alphas)),
        alpha_min=amin,
        at_member=bool(amin <= 1),
        rs_minimizers=list(rs_min.minimizers),
        alpha_at_rs_min=a_rs,
    )

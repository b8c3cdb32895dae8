"""Parisi functional for atomic measures.

For an atomic measure ``mu`` the Parisi PDE is solved exactly on each interval
where ``m(r) = mu([0, r])`` is constant: the Cole-Hopf substitution turns it
into a heat equation, giving the recursion

    X <- (1/m) log E exp(m X(x + sqrt(v) Z))      (m > 0)
    X <- E X(x + sqrt(v) Z)                       (m = 0)

with ``v`` the increment of ``xi'`` over the interval.  The last interval has
``m = 1`` and is done in closed form, ``log cosh x + v/2``.  A finite
difference solver of the PDE itself (:func:`parisi_pde_solve`) serves as an
independent check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit, logsumexp

from . import quad
from .errors import NumericError, NumericRangeError, PreconditionError
from .mixture import CouplingParams, MixtureSpec, theta, xi0_d1, xi0_d2
from .rs_at import RSMinimum, rs_minimize

M_ZERO = 1e-10
MERGE_TOL = 1e-9
MAX_POINTS = 400_000
SEARCH_POINTS = 20_000
N_POLISH = 2
VERIFY_FACTOR = 4
RS_GAP_TOL = 1e-9


@dataclass(frozen=True)
class RSBMeasure:
    """Atomic probability measure on ``[0, 1]``: sorted ``(q, w)`` pairs."""

    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        atoms = tuple((float(q), float(w)) for q, w in self.atoms)
        if not atoms:
            raise PreconditionError("measure needs at least one atom")
        qs = [q for q, _ in atoms]
        ws = [w for _, w in atoms]
        if any(not (0 <= q <= 1) for q in qs):
            raise PreconditionError(f"atoms must lie in [0, 1], got {qs}")
        if any(b <= a for a, b in zip(qs, qs[1:])):
            raise PreconditionError(f"atoms must be strictly increasing, got {qs}")
        if any(not w > 0 for w in ws):
            raise PreconditionError(f"weights must be positive, got {ws}")
        if abs(sum(ws) - 1) > 1e-12:
            raise PreconditionError(f"weights must sum to 1, got {sum(ws)!r}")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def dirac(cls, q: float) -> RSBMeasure:
        return cls(((q, 1.0),))

    @classmethod
    def from_arrays(cls, qs, ws, merge_tol: float = MERGE_TOL) -> RSBMeasure:
        """Sort, merge atoms closer than ``merge_tol``, drop negligible ones, renormalise."""
        order = np.argsort(qs, kind="stable")
        merged: list[list[float]] = []
        for q, w in zip(np.asarray(qs, float)[order], np.asarray(ws, float)[order]):
            if w <= 0:
                continue
            if merged and q - merged[-1][0] < merge_tol:
                merged[-1][1] += w
            else:
                merged.append([q, w])
        total = sum(w for _, w in merged)
        atoms = [(q, w / total) for q, w in merged if w > 1e-14 * total]
        # absorb rounding so the weights sum to one to the last bit
        atoms[-1] = (atoms[-1][0], 1.0 - sum(w for _, w in atoms[:-1]))
        return cls(tuple(atoms))

    @property
    def q(self) -> np.ndarray:
        return np.array([q for q, _ in self.atoms])

    @property
    def w(self) -> np.ndarray:
        return np.array([w for _, w in self.atoms])

    @property
    def cdf_levels(self) -> np.ndarray:
        """``m_i = mu([0, q_i])``; ``mu([0, s]) = m_i`` for ``s`` in ``[q_i, q_{i+1})``."""
        return np.cumsum(self.w)

    def to_json(self) -> dict:
        return {"atoms": [[q, w] for q, w in self.atoms]}

    @classmethod
    def from_json(cls, obj: dict) -> RSBMeasure:
        try:
            return cls(tuple((q, w) for q, w in obj["atoms"]))
        except (KeyError, TypeError) as exc:
            raise PreconditionError(f"malformed measure JSON: {obj!r}") from exc


def _segments(measure: RSBMeasure, spec, params):
    """``(m, left, right)`` for the intervals of ``[0, 1]`` where ``mu([0, r])`` is constant."""
    edges = [0.0, *measure.q, 1.0]
    levels = [0.0, *measure.cdf_levels]
    segs = []
    for a, b, m in zip(edges[:-1], edges[1:], levels):
        if b > a:
            segs.append((min(m, 1.0), a, b))
    return segs


def _penalty(segs, spec, params) -> float:
    """``(1/2) int_0^1 xi''(s) mu([0,s]) s ds`` via ``theta``."""
    return 0.5 * sum(m * (theta(spec, params, b) - theta(spec, params, a)) for m, a, b in segs)


def _level_rules(levels, order, max_points):
    if order is not None:
        rules = [quad._as_rule(order) for _ in levels]
    else:
        rules = [quad.gaussian_rule(s, tilt=m) for m, s in levels]
        coarsen = [0] * len(levels)
        while math.prod(len(r.nodes) for r in rules) > max_points:
            j = int(np.argmax([len(r.nodes) for r in rules]))
            coarsen[j] += 1
            m, s = levels[j]
            rules[j] = quad.scaled_rule(s, tilt=m, coarsen=coarsen[j])
    return rules


def _level_mean(X, m, w):
    """``(1/m) log E exp(m X)`` along the last axis; plain mean when ``m = 0``.

    Centred at the mean and evaluated with ``expm1``/``log1p`` while ``m X``
    stays moderate, which keeps full relative accuracy as ``m -> 0``.
    """
    mean = X @ w
    if m < M_ZERO:
        return mean
    a = m * (X - mean[..., None])
    if np.max(np.abs(a), initial=0.0) <= 30:
        return mean + np.log1p(np.expm1(a) @ w) / m
    return mean + logsumexp(a, b=w, axis=-1) / m


def parisi_value(
    measure: RSBMeasure,
    spec: MixtureSpec,
    params: CouplingParams,
    order: int | None = None,
    max_points: int = MAX_POINTS,
) -> float:
    """Parisi functional of an atomic measure via the exact level recursion.

    Args:
        order: Gauss-Hermite order per level; ``None`` picks
            :func:`quad.gaussian_rule` per level from its variance.
        max_points: cap on the tensor-product grid size; levels are coarsened
            (largest first) until the product fits.

    Raises:
        NumericRangeError: if the nested expectation is not finite.
    """
    segs = _segments(measure, spec, params)
    beta2 = params.beta**2
    pen = _penalty(segs, spec, params)

    levels = []
    tail_var = 0.0
    for m, a, b in segs:
        v = beta2 * (xi0_d1(spec, b) - xi0_d1(spec, a))
        if m >= 1.0 - 1e-15:
            tail_var += v
        elif v > 0:
            levels.append((m, math.sqrt(v)))

    rules = _level_rules(levels, order, max_points)
    L = len(levels)
    x = np.full((1,) * L, params.h, dtype=float)
    for j, ((_, s), g) in enumerate(zip(levels, rules)):
        shape = [1] * L
        shape[j] = len(g.nodes)
        x = x + s * g.nodes.reshape(shape)
    X = quad.log_cosh(x) + 0.5 * tail_var
    for (m, _), g in zip(reversed(levels), reversed(rules)):
        X = _level_mean(X, m, g.weights)
    u = float(X)
    if not math.isfinite(u):
        raise NumericRangeError("nested expectation overflowed")
    return u - pen


@dataclass(frozen=True)
class PDEGrid:
    """Spatial half-width, spatial points and baseline time steps on ``[0, 1]``."""

    x_max: float
    nx: int = 1025
    nr: int = 256

    def __post_init__(self):
        if self.nx < 64 or self.nr < 64:
            raise PreconditionError("PDE grid needs nx, nr >= 64")

    @classmethod
    def default(cls, spec, params, nx: int = 1025, nr: int = 256) -> PDEGrid:
        return cls(cls.min_half_width(spec, params), nx, nr)

    @staticmethod
    def min_half_width(spec, params) -> float:
        return 3 * (params.beta * math.sqrt(xi0_d1(spec, 1.0)) + abs(params.h)) + 8

    def refined(self) -> PDEGrid:
        """Doubled resolution in space and time (same window)."""
        return PDEGrid(self.x_max, 2 * self.nx - 1, 2 * self.nr)


CFL = 0.8
MAX_PDE_STEPS = 5_000_000


def parisi_pde_field(measure, spec, params, grid: PDEGrid | None = None):
    """Solve the Parisi PDE backwards from ``r = 1``; return ``(x, u(0, x))``.

    Explicit Euler steps for ``u_r + (xi''/2)(u_xx + m(r) u_x^2) = 0`` with
    centred differences.  Time steps are aligned with the atoms and refined
    below ``CFL * dx^2 / xi''``.  The boundary uses the asymptotic slopes
    ``u_x = -1`` (left) and ``+1`` (right).  The grid is centred at ``h``.
    """
    if grid is None:
        grid = PDEGrid.default(spec, params)
    if grid.x_max < PDEGrid.min_half_width(spec, params) - 1e-12:
        raise PreconditionError(f"x_max={grid.x_max} below the required half-width")
    n = grid.nx
    x = params.h + np.linspace(-grid.x_max, grid.x_max, n)
    dx = x[1] - x[0]
    u = quad.log_cosh(x)
    beta2 = params.beta**2

    total = 0
    for m, a, b in reversed(_segments(measure, spec, params)):
        d2max = beta2 * float(xi0_d2(spec, b))
        steps = max(math.ceil(grid.nr * (b - a)), math.ceil((b - a) * d2max / (CFL * dx * dx)), 1)
        total += steps
        if total > MAX_PDE_STEPS:
            raise NumericError("PDE time-step cap exceeded; coarsen the grid")
        dt = (b - a) / steps
        ghost_l, ghost_r = 2 * dx, 2 * dx
        for k in range(steps):
            r = b - (k + 0.5) * dt
            d = 0.5 * beta2 * float(xi0_d2(spec, r))
            up = np.empty(n + 2)
            up[1:-1] = u
            up[0] = u[1] + ghost_l
            up[-1] = u[-2] + ghost_r
            uxx = (up[2:] - 2 * u + up[:-2]) / (dx * dx)
            ux = (up[2:] - up[:-2]) / (2 * dx)
            u = u + dt * d * (uxx + m * ux * ux)
    return x, u


def parisi_pde_solve(measure, spec, params, grid: PDEGrid | None = None) -> float:
    """Parisi functional with ``u(0, h)`` from the finite-difference solver."""
    x, u = parisi_pde_field(measure, spec, params, grid)
    return float(np.interp(params.h, x, u)) - _penalty(_segments(measure, spec, params), spec, params)


class KRSBResult(NamedTuple):
    measure: RSBMeasure
    value: float


# stretched logistic: atoms can reach 0 and 1 exactly
def _to_measure(z: np.ndarray, n_atoms: int) -> RSBMeasure:
    qs = np.clip(1.2 * expit(z[:n_atoms]) - 0.1, 0.0, 1.0)
    u = z[n_atoms:]
    w = np.exp(u - u.max())
    return RSBMeasure.from_arrays(qs, w / w.sum())


def _from_atoms(qs, ws) -> np.ndarray:
    p = (np.clip(np.asarray(qs, float), 0, 1) + 0.1) / 1.2
    y = np.log(p) - np.log1p(-p)
    return np.concatenate([y, np.log(np.asarray(ws, float))])


def _starts(k: int, prev: RSBMeasure, q_rs: float, n_starts: int, rng) -> list[np.ndarray]:
    n = k + 1
    starts = []
    # previous optimum with its heaviest atom split in two
    qs, ws = list(prev.q), list(prev.w)
    while len(qs) < n:
        j = int(np.argmax(ws))
        qs.insert(j, qs[j])
        ws[j] /= 2
        ws.insert(j, ws[j])
    starts.append(_from_atoms(qs, ws))
    starts.append(_from_atoms([q_rs] * n, [1.0 / n] * n))
    # an atom at zero carrying most of the mass plus atoms high up
    for q_top, w0 in ((0.95, 0.9), (0.99, 0.97), (0.7, 0.6), (0.5, 0.3), (0.9, 0.99)):
        upper = np.linspace(q_top, 0.5 * (1 + q_top), k) if k > 1 else np.array([q_top])
        rest = np.full(k, (1 - w0) / k)
        starts.append(_from_atoms([0.0, *upper], [w0, *rest]))
    while len(starts) < max(n_starts, 8):
        qs = np.sort(rng.uniform(0, 1, n))
        starts.append(_from_atoms(qs, rng.dirichlet(np.ones(n))))
    return starts


def _nelder_mead(f, x0, step=0.7, maxfev=None):
    d = len(x0)
    simplex = np.vstack([x0, x0 + step * np.eye(d)])
    res = minimize(
        f,
        x0,
        method="Nelder-Mead",
        options=dict(
            initial_simplex=simplex,
            xatol=1e-8,
            fatol=1e-10,
            maxfev=maxfev or 400 * d,
            adaptive=True,
        ),
    )
    return res.x, float(res.fun)


def optimize_krsb(
    k: int,
    spec: MixtureSpec,
    params: CouplingParams,
    n_starts: int = 12,
    seed: int = 0,
    order: int | None = None,
    max_points: int = MAX_POINTS,
    _cache: dict | None = None,
) -> KRSBResult:
    """Best measure with at most ``k + 1`` atoms (``k`` levels of symmetry breaking).

    Multi-start Nelder-Mead over atom positions (stretched logistic) and
    weights (softmax), run on a tensor grid capped at ``SEARCH_POINTS``.  The
    ``N_POLISH`` best end points are re-optimised at full accuracy and scored
    on a grid ``VERIFY_FACTOR`` times larger.  Starts include the ``k - 1``
    optimum and the RS minimiser embedded as degenerate measures, so the
    returned value never exceeds the ``k - 1`` value.  Deterministic for a
    given ``seed``.
    """
    if not (0 <= k <= 4):
        raise PreconditionError(f"k must be in [0, 4], got {k}")
    cache = {} if _cache is None else _cache
    if k in cache:
        return cache[k]
    if k == 0:
        rs = rs_minimize(spec, params)
        mu = RSBMeasure.dirac(rs.minimizers[0])
        res = KRSBResult(mu, parisi_value(mu, spec, params, order, max_points))
        cache[0] = res
        return res

    prev = optimize_krsb(k - 1, spec, params, n_starts, seed, order, max_points, cache)
    rng = np.random.default_rng([seed, k])
    q_rs = cache[0].measure.q[0]
    n = k + 1

    def f(z, points=max_points):
        return parisi_value(_to_measure(z, n), spec, params, order, points)

    # search on a coarsened tensor grid, then polish the best few accurately
    coarse = lambda z: f(z, min(max_points, SEARCH_POINTS))
    found = [_nelder_mead(coarse, x0) for x0 in _starts(k, prev.measure, q_rs, n_starts, rng)]
    found.sort(key=lambda t: t[1])
    best = prev
    for z0, _ in found[:N_POLISH]:
        z, _ = _nelder_mead(f, z0, step=0.1, maxfev=150 * len(z0))
        mu = _to_measure(z, n)
        # re-score on a finer grid so coarsening error cannot fake an improvement
        val = parisi_value(mu, spec, params, order, VERIFY_FACTOR * max_points)
        if val < best.value:
            best = KRSBResult(mu, val)
    cache[k] = best
    return best


class GapReport(NamedTuple):
    gap: float
    rs_member: bool
    rs_value: float
    krsb_value: float
    measure: RSBMeasure
    values_by_k: tuple[float, ...]


def rs_gap(
    spec,
    params,
    k_max: int = 1,
    tol: float = RS_GAP_TOL,
    n_starts: int = 12,
    seed: int = 0,
    order: int | None = None,
    rs_min: RSMinimum | None = None,
) -> GapReport:
    """Improvement of ``k``-RSB (``k <= k_max``) over the best Dirac measure.

    ``rs_member`` holds when the improvement is at most ``tol``.  A
    precomputed ``rs_min`` is reused instead of minimising again.
    """
    if not (1 <= k_max <= 4):
        raise PreconditionError(f"k_max must be in [1, 4], got {k_max}")
    rs = rs_minimize(spec, params) if rs_min is None else rs_min
    mu = RSBMeasure.dirac(rs.minimizers[0])
    if params.beta == 0:
        return GapReport(0.0, True, rs.value, rs.value, mu, (rs.value,) * (k_max + 1))
    cache: dict = {0: KRSBResult(mu, parisi_value(mu, spec, params, order))}
    res = optimize_krsb(k_max, spec, params, n_starts, seed, order, _cache=cache)
    values = tuple(float(cache[k].value) for k in range(k_max + 1))
    gap = float(rs.value - res.value)
    return GapReport(gap, bool(gap <= tol), float(rs.value), float(res.value), res.measure, values)

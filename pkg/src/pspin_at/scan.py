"""Phase-diagram scans over ``(beta, h)`` and the JSON run configuration."""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from . import hopflax, parisi, rs_at
from .errors import PreconditionError
from .mixture import CouplingParams, MixtureSpec, parse_spec

CSV_COLUMNS = (
    "beta",
    "h",
    "alpha_min",
    "at_member",
    "rs_value",
    "krsb_value",
    "gap",
    "rs_member",
    "alpha_at_rs_min",
    "rs_min_unique",
    "witness",
)


@dataclass(frozen=True)
class Tolerances:
    """Numerical knobs shared by every command; all overridable from a config file."""

    grid_points: int = rs_at.GRID_POINTS
    value_tol: float = rs_at.VALUE_TOL
    sep_tol: float = rs_at.SEP_TOL
    rs_gap_tol: float = parisi.RS_GAP_TOL
    n_starts: int = 12
    quad_order: int | None = None
    cert_margin: float = hopflax.CERT_MARGIN
    l_points: int = hopflax.L_POINTS
    bisect_width: float = hopflax.BISECT_WIDTH

    @classmethod
    def from_json(cls, obj: dict | None) -> Tolerances:
        obj = obj or {}
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise PreconditionError(f"unknown tolerances: {sorted(unknown)}")
        return cls(**obj)


@dataclass(frozen=True)
class PhaseCell:
    """Verdicts at one grid point.

    ``witness`` marks a point inside the AT region that symmetry breaking
    strictly improves.  At ``h = 0`` a witness also carries the Hopf-Lax
    margin as an independent certificate.  A failed cell keeps its
    coordinates, NaN everywhere else, and the error message.
    """

    beta: float
    h: float
    alpha_min: float = math.nan
    at_member: bool = False
    rs_value: float = math.nan
    krsb_value: float = math.nan
    gap: float = math.nan
    rs_member: bool = False
    alpha_at_rs_min: float = math.nan
    rs_min_unique: bool = False
    witness: bool = False
    values_by_k: tuple[float, ...] = ()
    hopflax_margin: float | None = None
    error: str | None = None

    def csv_row(self) -> list[str]:
        if self.error is not None:
            return [_fmt(self.beta), _fmt(self.h)] + ["nan"] * (len(CSV_COLUMNS) - 2)
        return [_fmt(getattr(self, c)) for c in CSV_COLUMNS]

    def to_json(self) -> dict:
        return asdict(self)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    return "%.12g" % x


def cell_seed(seed: int, i: int, j: int) -> int:
    """Seed for grid cell ``(i, j)``; independent of evaluation order."""
    return int(np.random.SeedSequence([seed, i, j]).generate_state(1)[0])


def evaluate_cell(spec: MixtureSpec, beta: float, h: float, k_max: int, seed: int, tol: Tolerances) -> PhaseCell:
    """All verdicts at a single ``(beta, h)``; exceptions propagate."""
    params = CouplingParams(beta, h)
    rs = rs_at.rs_minimize(spec, params, tol.grid_points, tol.value_tol, tol.sep_tol, tol.quad_order)
    at = rs_at.alpha(spec, params, tol.grid_points, tol.quad_order, rs_min=rs)
    gap = parisi.rs_gap(spec, params, k_max, tol.rs_gap_tol, tol.n_starts, seed, tol.quad_order, rs_min=rs)
    witness = at.at_member and not gap.rs_member
    margin = None
    if witness and h == 0:
        margin = hopflax.best_bound(spec, params, n=tol.l_points).margin
    return PhaseCell(
        beta=float(beta),
        h=float(h),
        alpha_min=float(at.alpha_min),
        at_member=at.at_member,
        rs_value=float(rs.value),
        krsb_value=float(gap.krsb_value),
        gap=float(gap.gap),
        rs_member=gap.rs_member,
        alpha_at_rs_min=float(at.alpha_at_rs_min),
        rs_min_unique=rs.unique,
        witness=witness,
        values_by_k=tuple(float(v) for v in gap.values_by_k),
        hopflax_margin=margin,
    )


def _axis(rng, n: int, name: str) -> np.ndarray:
    lo, hi = map(float, rng)
    if not (math.isfinite(lo) and math.isfinite(hi)) or n < 1 or hi < lo:
        raise PreconditionError(f"empty {name} range {rng} with {n} points")
    if hi == lo:
        if n != 1:
            raise PreconditionError(f"degenerate {name} range needs exactly one point")
        return np.array([lo])
    if n < 2:
        raise PreconditionError(f"{name} range needs at least two points")
    return np.linspace(lo, hi, n)


def phase_grid(
    spec: MixtureSpec,
    beta_range: tuple[float, float],
    h_range: tuple[float, float],
    n_beta: int,
    n_h: int,
    k_max: int = 1,
    seed: int = 0,
    workers: int = 1,
    tol: Tolerances | None = None,
) -> list[PhaseCell]:
    """Evaluate every cell of a ``n_beta x n_h`` grid, ``beta`` major.

    A range with equal endpoints is accepted as a single value when its
    point count is one.  Failures are recorded in the cell.  Output does not
    depend on ``workers``.
    """
    tol = tol or Tolerances()
    if workers < 1:
        raise PreconditionError("workers must be positive")
    if not 1 <= k_max <= 4:
        raise PreconditionError(f"k_max must be in [1, 4], got {k_max}")
    if any(b < 0 for b in beta_range):
        raise PreconditionError("beta must be non-negative")
    betas = _axis(beta_range, n_beta, "beta")
    hs = _axis(h_range, n_h, "h")
    jobs = [
        (spec, float(b), float(h), k_max, cell_seed(seed, i, j), tol)
        for i, b in enumerate(betas)
        for j, h in enumerate(hs)
    ]
    if workers == 1 or len(jobs) == 1:
        return [_run_cell(j) for j in jobs]
    # cell work is dominated by small numpy calls, so processes beat threads
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(_run_cell, jobs))


def _run_cell(job) -> PhaseCell:
    spec, b, h, k_max, seed, tol = job
    try:
        return evaluate_cell(spec, b, h, k_max, seed, tol)
    except (ArithmeticError, ValueError) as exc:
        return PhaseCell(beta=b, h=h, error=f"{type(exc).__name__}: {exc}")


def cells_to_csv(cells: list[PhaseCell]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for c in cells:
        w.writerow(c.csv_row())
    return buf.getvalue()


def write_csv(cells: list[PhaseCell], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(cells_to_csv(cells))


@dataclass(frozen=True)
class RunConfig:
    """Contents of a JSON config file with sections
    ``{model, params, scan, tolerances, seed}``; all sections optional."""

    model: MixtureSpec | None = None
    params: dict = field(default_factory=dict)
    scan: dict = field(default_factory=dict)
    tolerances: Tolerances = field(default_factory=Tolerances)
    seed: int | None = None

    @classmethod
    def from_json(cls, obj: dict) -> RunConfig:
        if not isinstance(obj, dict):
            raise PreconditionError("config must be a JSON object")
        unknown = set(obj) - {"model", "params", "scan", "tolerances", "seed"}
        if unknown:
            raise PreconditionError(f"unknown config sections: {sorted(unknown)}")
        model = obj.get("model")
        if isinstance(model, str):
            model = parse_spec(model)
        elif isinstance(model, dict):
            model = MixtureSpec.from_json(model)
        elif model is not None:
            raise PreconditionError("model must be a spec string or a {'terms': ...} object")
        seed = obj.get("seed")
        if seed is not None and (not isinstance(seed, int) or not 0 <= seed < 2**64):
            raise PreconditionError("seed must be an unsigned 64-bit integer")
        return cls(
            model=model,
            params=dict(obj.get("params") or {}),
            scan=dict(obj.get("scan") or {}),
            tolerances=Tolerances.from_json(obj.get("tolerances")),
            seed=seed,
        )

    @classmethod
    def load(cls, path) -> RunConfig:
        try:
            with open(path) as fh:
                obj = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise PreconditionError(f"cannot read config {path}: {exc}") from exc
        return cls.from_json(obj)

    def with_seed(self, seed: int | None) -> RunConfig:
        return self if seed is None else replace(self, seed=seed)

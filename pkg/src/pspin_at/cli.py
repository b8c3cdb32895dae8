"""Command-line entry point: ``pspin-at <subcommand> ...``.

Every subcommand prints a JSON document (``phase-diagram`` prints CSV unless
``--out`` ends in ``.json``).  Exit status is 0 on success, 2 on bad input
and 3 on numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import finite_n, hopflax, parisi, rs_at, scan
from .errors import NumericError, PreconditionError
from .mixture import CouplingParams, MixtureSpec, parse_spec

EXIT_OK, EXIT_PRECONDITION, EXIT_NUMERIC = 0, 2, 3


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (MixtureSpec, parisi.RSBMeasure)):
        return obj.to_json()
    if hasattr(obj, "to_json"):
        return _jsonable(obj.to_json())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def _emit(payload, out: str | None) -> None:
    text = json.dumps(_jsonable(payload), indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = {"default": argparse.SUPPRESS} if suppress else {}
    p.add_argument("--config", help="JSON config with sections model, params, scan, tolerances, seed", **d)
    p.add_argument("--out", help="write output to this path (.csv or .json)", **d)
    p.add_argument("--threads", type=int, help="worker pool width for grid scans", **d)
    p.add_argument("--seed", type=int, help="unsigned 64-bit seed", **d)


def _model_flags(p: argparse.ArgumentParser, field: bool = True) -> None:
    p.add_argument("--spec", help='mixture: "sk", "sk+p4c5", "pure4", JSON text or a JSON file')
    p.add_argument("--beta", type=float)
    if field:
        p.add_argument("--h", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pspin-at", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        _global_flags(p, suppress=True)
        return p

    p = add("at-check", "fixed points, AT statistic and RS minimisers")
    _model_flags(p)

    p = add("parisi-eval", "Parisi functional of an atomic measure")
    _model_flags(p)
    p.add_argument("--measure", required=True, help='{"atoms": [[q, w], ...]} as text or file')
    p.add_argument("--pde", action="store_true", help="also solve the Parisi PDE on the default grid")

    p = add("rsb-optimize", "best measure with k levels of symmetry breaking")
    _model_flags(p)
    p.add_argument("--k", type=int, default=1)

    p = add("hopflax", "Hopf-Lax upper bound at h = 0")
    _model_flags(p, field=False)
    p.add_argument("--l", type=float, help="evaluate at this l only; default minimises over l")

    p = add("counterexample", "smallest C certifying a point in AT but not RS")
    p.add_argument("--beta", type=float, default=0.9)
    p.add_argument("--p", type=int, default=4)
    p.add_argument("--c-grid", default="5,10,20,40,80", help="comma-separated increasing C values")
    p.add_argument("--k-max", type=int, default=1)

    p = add("beta-c", "bisection for the critical inverse temperature")
    p.add_argument("--spec")
    p.add_argument("--h", type=float)
    p.add_argument("--bracket", type=float, nargs=2, metavar=("LO", "HI"), required=True)
    p.add_argument("--k-max", type=int, default=1)

    p = add("finite-n", "exact enumeration with disorder averaging")
    _model_flags(p)
    p.add_argument("--n", type=int, default=12)
    p.add_argument("--samples", type=int, default=200)

    p = add("phase-diagram", "scan a (beta, h) grid and write CSV")
    p.add_argument("--spec")
    p.add_argument("--beta-range", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--h-range", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--n-beta", type=int)
    p.add_argument("--n-h", type=int)
    p.add_argument("--k-max", type=int)
    return parser


class _Context:
    """Merges command-line values over config-file values."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        cfg = getattr(args, "config", None)
        self.config = scan.RunConfig.load(cfg) if cfg else scan.RunConfig()
        self.tol = self.config.tolerances
        if getattr(args, "seed", None) is not None:
            self.seed()

    def spec(self) -> MixtureSpec:
        text = getattr(self.args, "spec", None)
        if text is not None:
            return parse_spec(text)
        if self.config.model is None:
            raise PreconditionError("no model given (use --spec or the config 'model' section)")
        return self.config.model

    def value(self, name, section="params", default=None, required=False):
        v = getattr(self.args, name, None)
        if v is None:
            v = getattr(self.config, section).get(name, default)
        if v is None and required:
            raise PreconditionError(f"missing value for {name}")
        return v

    def params(self, field: bool = True) -> CouplingParams:
        beta = self.value("beta", required=True)
        h = self.value("h", default=0.0) if field else 0.0
        return CouplingParams(float(beta), float(h))

    def seed(self, default=None):
        s = getattr(self.args, "seed", None)
        if s is None:
            s = self.config.seed
        if s is None:
            s = default
        if s is not None and not 0 <= s < 2**64:
            raise PreconditionError("seed must be an unsigned 64-bit integer")
        return s

    @property
    def out(self):
        return getattr(self.args, "out", None)

    @property
    def threads(self) -> int:
        t = getattr(self.args, "threads", None)
        return 1 if t is None else t


def _parse_measure(text: str) -> parisi.RSBMeasure:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError:
        try:
            with open(text) as fh:
                obj = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise PreconditionError(f"cannot parse measure {text!r}: {exc}") from exc
    return parisi.RSBMeasure.from_json(obj)


def cmd_at_check(ctx: _Context):
    spec, params, tol = ctx.spec(), ctx.params(), ctx.tol
    rs = rs_at.rs_minimize(spec, params, tol.grid_points, tol.value_tol, tol.sep_tol, tol.quad_order)
    rep = rs_at.alpha(spec, params, tol.grid_points, tol.quad_order, rs_min=rs)
    return {"spec": spec, "beta": params.beta, "h": params.h, **rep.to_json(), "rs_value": rs.value, "rs_min_unique": rs.unique}


def cmd_parisi_eval(ctx: _Context):
    spec, params = ctx.spec(), ctx.params()
    mu = _parse_measure(ctx.args.measure)
    out = {"measure": mu, "value": parisi.parisi_value(mu, spec, params, ctx.tol.quad_order)}
    if ctx.args.pde:
        out["pde_value"] = parisi.parisi_pde_solve(mu, spec, params)
    return out


def cmd_rsb_optimize(ctx: _Context):
    spec, params, tol = ctx.spec(), ctx.params(), ctx.tol
    cache: dict = {}
    res = parisi.optimize_krsb(ctx.args.k, spec, params, tol.n_starts, ctx.seed(0), tol.quad_order, _cache=cache)
    return {
        "k": ctx.args.k,
        "measure": res.measure,
        "value": res.value,
        "values_by_k": [cache[k].value for k in sorted(cache)],
    }


def cmd_hopflax(ctx: _Context):
    spec, params = ctx.spec(), ctx.params(field=False)
    l = ctx.value("l")
    if l is not None:
        return {"t": params.t, "l": l, "bound": hopflax.hopflax_bound(spec, params, float(l))}
    return hopflax.best_bound(spec, params, n=ctx.tol.l_points)


def cmd_counterexample(ctx: _Context):
    try:
        grid = tuple(float(c) for c in ctx.args.c_grid.split(","))
    except ValueError as exc:
        raise PreconditionError(f"bad --c-grid {ctx.args.c_grid!r}") from exc
    res = hopflax.counterexample_search(
        ctx.args.beta, ctx.args.p, grid, ctx.tol.cert_margin, ctx.args.k_max, ctx.seed(0)
    )
    out = {"found": res.found, "c_min": res.c_min, "best_margin": res.best_margin, "spec": res.spec}
    if res.found:
        cert = res.certificate
        out["certificate"] = {k: v for k, v in cert.to_json().items() if k != "l_grid"}
        out["at_report"] = res.at_report
        g = res.gap_report
        out["gap_report"] = {
            "gap": g.gap,
            "rs_member": g.rs_member,
            "rs_value": g.rs_value,
            "krsb_value": g.krsb_value,
            "measure": g.measure,
            "values_by_k": g.values_by_k,
        }
    return out


def cmd_beta_c(ctx: _Context):
    spec, tol = ctx.spec(), ctx.tol
    h = float(ctx.value("h", default=0.0))
    lo, hi = ctx.args.bracket
    bc = hopflax.beta_c_bisect(
        spec, (lo, hi), h, ctx.args.k_max, tol.bisect_width, ctx.seed(0), tol.rs_gap_tol, tol.n_starts
    )
    return {"beta_c": bc, "bracket": [lo, hi], "width": tol.bisect_width, "h": h}


def cmd_finite_n(ctx: _Context):
    spec, params = ctx.spec(), ctx.params()
    seed = ctx.seed()
    mean, err = finite_n.free_energy_mc(spec, params, ctx.args.n, ctx.args.samples, seed)
    return {"mean": mean, "stderr": err, "n": ctx.args.n, "samples": ctx.args.samples, "seed": seed}


def cmd_phase_diagram(ctx: _Context):
    spec = ctx.spec()
    get = lambda name, default=None: ctx.value(name, "scan", default, required=default is None)
    cells = scan.phase_grid(
        spec,
        tuple(get("beta_range")),
        tuple(get("h_range", [0.0, 0.0])),
        int(get("n_beta")),
        int(get("n_h", 1)),
        int(get("k_max", 1)),
        ctx.seed(0),
        ctx.threads,
        ctx.tol,
    )
    out = ctx.out
    if out and out.endswith(".json"):
        _emit({"spec": spec, "cells": [c.to_json() for c in cells]}, out)
    elif out:
        scan.write_csv(cells, out)
    else:
        sys.stdout.write(scan.cells_to_csv(cells))
    return None


COMMANDS = {
    "at-check": cmd_at_check,
    "parisi-eval": cmd_parisi_eval,
    "rsb-optimize": cmd_rsb_optimize,
    "hopflax": cmd_hopflax,
    "counterexample": cmd_counterexample,
    "beta-c": cmd_beta_c,
    "finite-n": cmd_finite_n,
    "phase-diagram": cmd_phase_diagram,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        ctx = _Context(args)
        if ctx.threads < 1:
            raise PreconditionError("--threads must be positive")
        payload = COMMANDS[args.command](ctx)
        if payload is not None:
            _emit(payload, ctx.out)
    except (PreconditionError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (NumericError, ArithmeticError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

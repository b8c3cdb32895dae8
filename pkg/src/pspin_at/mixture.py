"""Mixed p-spin coupling functions and their scalar calculus.

A mixture is ``xi0(r) = sum_p c_p r**p`` over finitely many degrees ``p >= 2``
with non-negative coefficients.  The temperature-scaled function used by the
Parisi machinery is ``xi = beta**2 * xi0``.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import PreconditionError, SolverError

NEWTON_TOL = 1e-12
NEWTON_MAXITER = 100


@dataclass(frozen=True)
class MixtureSpec:
    """Finite list of ``(degree, coefficient)`` pairs defining ``xi0``."""

    terms: tuple[tuple[int, float], ...]

    def __post_init__(self):
        terms = tuple((int(p), float(c)) for p, c in self.terms)
        if not terms:
            raise PreconditionError("mixture needs at least one term")
        degrees = [p for p, _ in terms]
        if any(p < 2 for p in degrees):
            raise PreconditionError(f"all degrees must be >= 2, got {degrees}")
        if any(b <= a for a, b in zip(degrees, degrees[1:])):
            raise PreconditionError(f"degrees must be strictly increasing, got {degrees}")
        if any(not math.isfinite(c) or c < 0 for _, c in terms):
            raise PreconditionError("coefficients must be finite and non-negative")
        if not any(c > 0 for _, c in terms):
            raise PreconditionError("at least one coefficient must be positive")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def sk(cls) -> MixtureSpec:
        return cls(((2, 0.5),))

    @classmethod
    def sk_plus_p(cls, p: int, C: float) -> MixtureSpec:
        """``r**2/2 + (C r)**p / p``: SK plus a strong p-spin term."""
        return cls(((2, 0.5), (p, C**p / p)))

    @classmethod
    def pure(cls, p: int, coeff: float | None = None) -> MixtureSpec:
        return cls(((p, 1.0 / p if coeff is None else coeff),))

    @cached_property
    def coeffs(self) -> np.ndarray:
        """Dense power-basis coefficients, lowest degree first."""
        c = np.zeros(self.terms[-1][0] + 1)
        for p, b in self.terms:
            c[p] = b
        return c

    @cached_property
    def _derivs(self) -> tuple[np.ndarray, ...]:
        c = self.coeffs
        return (c, P.polyder(c, 1), P.polyder(c, 2), P.polyder(c, 3))

    def to_json(self) -> dict:
        return {"terms": [[p, c] for p, c in self.terms]}

    @classmethod
    def from_json(cls, obj: dict) -> MixtureSpec:
        try:
            return cls(tuple((p, c) for p, c in obj["terms"]))
        except (KeyError, TypeError) as exc:
            raise PreconditionError(f"malformed mixture JSON: {obj!r}") from exc


_SK_PLUS = re.compile(r"^sk\+p(\d+)c([0-9.eE+-]+)$")
_PURE = re.compile(r"^pure(\d+)$")


def parse_spec(text: str) -> MixtureSpec:
    """Parse a mixture from a shorthand, an inline JSON object or a JSON file.

    Shorthands: ``sk``, ``sk+p<P>c<C>`` (e.g. ``sk+p4c5``) and ``pure<P>``
    (coefficient ``1/P``).
    """
    s = text.strip()
    if s.lower() == "sk":
        return MixtureSpec.sk()
    if m := _SK_PLUS.match(s.lower()):
        return MixtureSpec.sk_plus_p(int(m.group(1)), float(m.group(2)))
    if m := _PURE.match(s.lower()):
        return MixtureSpec.pure(int(m.group(1)))
    if s.startswith("{"):
        return MixtureSpec.from_json(json.loads(s))
    path = Path(s)
    if path.is_file():
        return MixtureSpec.from_json(json.loads(path.read_text()))
    raise PreconditionError(f"unrecognised mixture {text!r}")


@dataclass(frozen=True)
class CouplingParams:
    """Inverse temperature ``beta`` and external field ``h``."""

    beta: float
    h: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.beta) and self.beta >= 0):
            raise PreconditionError(f"beta must be finite and >= 0, got {self.beta}")
        if not math.isfinite(self.h):
            raise PreconditionError(f"h must be finite, got {self.h}")

    @property
    def t(self) -> float:
        return self.beta**2 / 2


def xi0(spec: MixtureSpec, r):
    return P.polyval(r, spec._derivs[0])


def xi0_d1(spec: MixtureSpec, r):
    return P.polyval(r, spec._derivs[1])


def xi0_d2(spec: MixtureSpec, r):
    return P.polyval(r, spec._derivs[2])


def xi0_d3(spec: MixtureSpec, r):
    return P.polyval(r, spec._derivs[3])


def theta(spec: MixtureSpec, params: CouplingParams, q):
    """``q xi'(q) - xi(q)`` with ``xi = beta**2 xi0``.

    Equals ``int_0^q xi''(s) s ds``, the building block of the Parisi penalty.
    """
    return params.beta**2 * (q * xi0_d1(spec, q) - xi0(spec, q))


def conjugate(spec: MixtureSpec, a: float) -> tuple[float, float]:
    """Convex conjugate ``sup_{r >= 0} (a r - xi0(r))`` and its maximiser.

    The maximiser solves ``xi0'(r) = a``; ``xi0'`` is increasing on
    ``[0, inf)`` with ``xi0'(0) = 0``, so a safeguarded Newton iteration on a
    geometric bracket converges to the unique root.

    Raises:
        PreconditionError: if ``a < 0``.
        SolverError: if Newton/bisection does not reach ``NEWTON_TOL``.
    """
    if not a >= 0:
        raise PreconditionError(f"conjugate needs a >= 0, got {a}")
    if a == 0:
        return 0.0, 0.0

    lo, hi = 0.0, 1.0
    for _ in range(2000):
        if xi0_d1(spec, hi) >= a:
            break
        lo, hi = hi, 2 * hi
    else:
        raise SolverError("could not bracket xi0'(r) = a", (lo, hi))

    r = 0.5 * (lo + hi)
    for _ in range(NEWTON_MAXITER):
        g = xi0_d1(spec, r) - a
        if abs(g) <= NEWTON_TOL * max(1.0, a):
            break
        if g > 0:
            hi = r
        else:
            lo = r
        d = xi0_d2(spec, r)
        step = r - g / d if d > 0 else -1.0
        # fall back to bisection when Newton leaves the bracket
        r = step if lo <= step <= hi else 0.5 * (lo + hi)
        if hi - lo <= 4 * np.finfo(float).eps * max(1.0, hi):
            break
    else:
        raise SolverError("conjugate Newton iteration did not converge", (lo, hi))
    r = float(r)
    return float(a * r - xi0(spec, r)), r

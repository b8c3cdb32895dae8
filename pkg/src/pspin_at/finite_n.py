"""Exact enumeration of small mixed p-spin systems with disorder averaging."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import PreconditionError
from .mixture import CouplingParams, MixtureSpec
from .quad import log_cosh

N_MAX = 16
CHUNK_ENTRIES = 1 << 22
MAX_TENSOR = 1 << 25


def configurations(N: int) -> np.ndarray:
    """All ``2**N`` spin vectors, row ``k`` has ``sigma_i = 1 - 2*bit_i(k)``."""
    k = np.arange(1 << N)[:, None]
    return (1 - 2 * ((k >> np.arange(N)) & 1)).astype(float)


def _tensor_power(sigma: np.ndarray, p: int) -> np.ndarray:
    out = np.ones((sigma.shape[0], 1))
    for _ in range(p):
        out = (out[:, :, None] * sigma[:, None, :]).reshape(sigma.shape[0], -1)
    return out


def _p_spin_energies(sigma: np.ndarray, J: np.ndarray, p: int) -> np.ndarray:
    """``sum_{i1..ip} J[i1..ip] sigma_i1 ... sigma_ip`` for every row of ``sigma``.

    The index tuple is split in two halves so only ``N**ceil(p/2)`` columns are
    ever materialised per configuration chunk.
    """
    n_conf, N = sigma.shape
    a = p // 2
    b = p - a
    Jm = J.reshape(N**a, N**b)
    out = np.empty(n_conf)
    chunk = max(1, CHUNK_ENTRIES // N**b)
    for s in range(0, n_conf, chunk):
        sig = sigma[s : s + chunk]
        out[s : s + chunk] = np.einsum("ij,ij->i", _tensor_power(sig, a) @ Jm, _tensor_power(sig, b))
    return out


@dataclass(frozen=True, eq=False)
class DisorderSample:
    """One realised Hamiltonian on all ``2**N`` configurations."""

    N: int
    spec: MixtureSpec
    seed: int
    energies: np.ndarray = field(repr=False)


def sample_hamiltonian(spec: MixtureSpec, N: int, seed: int) -> DisorderSample:
    """Draw ``H_N`` with covariance ``N xi0(R)`` from i.i.d. Gaussian tensors.

    Each term ``(p, c)`` contributes ``sqrt(c) N**((1-p)/2) sum J sigma...sigma``
    with a full ``N**p`` tensor of standard Gaussians; terms are drawn in
    storage order from one generator seeded with ``seed``.
    """
    if not 2 <= N <= N_MAX:
        raise PreconditionError(f"N must be in [2, {N_MAX}], got {N}")
    if seed is None:
        raise PreconditionError("a seed is required")
    for p, _ in spec.terms:
        if N**p > MAX_TENSOR:
            raise PreconditionError(f"coupling tensor N**p = {N}**{p} exceeds {MAX_TENSOR} entries")
    rng = np.random.default_rng(seed)
    sigma = configurations(N)
    H = np.zeros(sigma.shape[0])
    for p, c in spec.terms:
        J = rng.standard_normal(N**p)
        if c > 0:
            H += math.sqrt(c) * N ** ((1 - p) / 2) * _p_spin_energies(sigma, J, p)
    H.setflags(write=False)
    return DisorderSample(N, spec, int(seed), H)


def sample_seeds(seed: int, n: int) -> list[int]:
    """Independent 64-bit seeds derived from a master seed."""
    return [int(s.generate_state(1, np.uint64)[0]) for s in np.random.SeedSequence(seed).spawn(n)]


def free_energy_mc(
    spec: MixtureSpec,
    params: CouplingParams,
    N: int = 12,
    n_disorder: int = 200,
    seed: int | None = None,
    control_variate: bool = True,
) -> tuple[float, float]:
    """Disorder average of ``(1/N) log E_0 exp(beta H + h sum sigma)``.

    Each sample is summed exactly over ``2**N`` states.  With
    ``control_variate`` the configuration average of ``beta H`` (mean zero,
    so the expectation is unchanged) is subtracted per sample, which removes
    the large configuration-independent part of the noise.

    Returns:
        ``(mean, stderr)`` over ``n_disorder`` samples.

    Raises:
        PreconditionError: if ``seed`` is missing or ``n_disorder < 1``.
    """
    if seed is None:
        raise PreconditionError("a seed is required")
    if n_disorder < 1:
        raise PreconditionError("n_disorder must be positive")
    if not 2 <= N <= N_MAX:
        raise PreconditionError(f"N must be in [2, {N_MAX}], got {N}")
    if params.beta == 0:
        # no disorder left: the spins decouple
        return float(log_cosh(params.h)), 0.0
    sigma_sum = configurations(N).sum(axis=1)
    vals = np.empty(n_disorder)
    for j, s in enumerate(sample_seeds(seed, n_disorder)):
        H = sample_hamiltonian(spec, N, s).energies
        logz = logsumexp(params.beta * H + params.h * sigma_sum) - N * math.log(2)
        if control_variate:
            logz -= params.beta * H.mean()
        vals[j] = logz / N
    stderr = vals.std(ddof=1) / math.sqrt(n_disorder) if n_disorder > 1 else 0.0
    return float(vals.mean()), float(stderr)

import itertools
import math

import numpy as np
import pytest

from pspin_at import finite_n
from pspin_at.errors import PreconditionError
from pspin_at.finite_n import configurations, free_energy_mc, sample_hamiltonian, sample_seeds
from pspin_at.mixture import CouplingParams, MixtureSpec, xi0
from pspin_at.parisi import optimize_krsb
from pspin_at.rs_at import rs_minimize

from conftest import SPECS

COV_SPECS = {"sk": SPECS["sk"], "pure4": SPECS["pure4"], "mixed": SPECS["mixed"]}


def brute_force_energies(spec, N, seed):
    """Explicit sum over index tuples with the same Gaussian draws."""
    rng = np.random.default_rng(seed)
    sigma = configurations(N)
    H = np.zeros(len(sigma))
    for p, c in spec.terms:
        J = rng.standard_normal(N**p).reshape((N,) * p)
        for idx in itertools.product(range(N), repeat=p):
            H += math.sqrt(c) * N ** ((1 - p) / 2) * J[idx] * np.prod(sigma[:, idx], axis=1)
    return H


def energy_matrix(spec, N, n):
    return np.array([sample_hamiltonian(spec, N, s).energies for s in range(n)])


def test_configurations_order():
    s = configurations(3)
    assert s.shape == (8, 3)
    assert s[0].tolist() == [1, 1, 1]
    assert s[1].tolist() == [-1, 1, 1]
    assert len({tuple(r) for r in s}) == 8


@pytest.mark.parametrize("spec", COV_SPECS.values(), ids=COV_SPECS.keys())
@pytest.mark.parametrize("N", [2, 3, 4])
def test_energies_match_brute_force(spec, N):
    np.testing.assert_allclose(sample_hamiltonian(spec, N, 11).energies, brute_force_energies(spec, N, 11), atol=1e-12)


def test_chunking_does_not_change_energies(monkeypatch):
    spec = SPECS["mixed"]
    full = sample_hamiltonian(spec, 6, 3).energies
    monkeypatch.setattr(finite_n, "CHUNK_ENTRIES", 50)
    np.testing.assert_allclose(sample_hamiltonian(spec, 6, 3).energies, full, atol=1e-12)


def test_sk_two_spin_covariances():
    spec = SPECS["sk"]
    n = 100_000
    H = energy_matrix(spec, 2, n)
    # configurations 0 = (1, 1) and 2 = (1, -1) have overlap 0
    prod = H[:, 0] * H[:, 2]
    assert abs(prod.mean()) <= 3 * prod.std() / math.sqrt(n)
    sq = H[:, 1] ** 2
    assert abs(sq.mean() - 2 * xi0(spec, 1.0)) <= 3 * sq.std() / math.sqrt(n)


@pytest.mark.parametrize("spec", COV_SPECS.values(), ids=COV_SPECS.keys())
@pytest.mark.parametrize("N", [2, 4])
def test_covariance_identity(spec, N):
    n = 20_000
    H = energy_matrix(spec, N, n)
    sigma = configurations(N)
    pairs = [(0, 0), (0, 1), (0, len(sigma) - 1), (1, 2), (len(sigma) // 2, 3)]
    for i, j in pairs:
        prod = H[:, i] * H[:, j]
        want = N * xi0(spec, sigma[i] @ sigma[j] / N)
        assert abs(prod.mean() - want) <= 3 * prod.std() / math.sqrt(n), (i, j)


def test_reproducible_and_seed_sensitive():
    spec = SPECS["mixed"]
    a = sample_hamiltonian(spec, 8, 123)
    b = sample_hamiltonian(spec, 8, 123)
    c = sample_hamiltonian(spec, 8, 124)
    np.testing.assert_array_equal(a.energies, b.energies)
    assert not np.array_equal(a.energies, c.energies)
    assert (a.N, a.seed, a.spec) == (8, 123, spec)
    with pytest.raises(ValueError):
        a.energies[0] = 0.0


@pytest.mark.parametrize("N", [1, 17])
def test_size_range(N):
    with pytest.raises(PreconditionError):
        sample_hamiltonian(SPECS["sk"], N, 0)


def test_seed_required():
    with pytest.raises(PreconditionError):
        sample_hamiltonian(SPECS["sk"], 4, None)
    with pytest.raises(PreconditionError):
        free_energy_mc(SPECS["sk"], CouplingParams(0.5), 4, 10)


def test_sample_seeds_deterministic():
    assert sample_seeds(7, 5) == sample_seeds(7, 5)
    assert len(set(sample_seeds(7, 50))) == 50


@pytest.mark.parametrize("N", [2, 5, 10])
@pytest.mark.parametrize("h", [0.0, 0.3, -1.2])
def test_infinite_temperature_free_energy(N, h):
    mean, err = free_energy_mc(SPECS["mixed"], CouplingParams(0.0, h), N, 6, seed=1)
    assert mean == pytest.approx(math.log(math.cosh(h)), abs=1e-14)
    assert err == 0.0


def test_control_variate_is_unbiased():
    spec, params = SPECS["sk"], CouplingParams(0.7, 0.2)
    a, ea = free_energy_mc(spec, params, 8, 400, seed=3)
    b, eb = free_energy_mc(spec, params, 8, 400, seed=3, control_variate=False)
    assert ea < eb
    assert abs(a - b) <= 3 * eb


def test_monotone_in_beta():
    spec = SPECS["sk"]
    means = [free_energy_mc(spec, CouplingParams(b), 10, 100, seed=4) for b in (0.2, 0.5, 0.8)]
    for (m1, e1), (m2, e2) in zip(means, means[1:]):
        assert m2 >= m1 - 3 * math.hypot(e1, e2)


def test_sk_high_temperature_below_rs_value():
    mean, err = free_energy_mc(SPECS["sk"], CouplingParams(0.5), 12, 200, seed=7)
    assert mean <= 0.0625 + 3 * err


def test_counterexample_model_sits_below_one_step_rsb():
    spec, params = MixtureSpec.sk_plus_p(4, 5.0), CouplingParams(0.9)
    mean, err = free_energy_mc(spec, params, 12, 50, seed=7)
    rs = rs_minimize(spec, params).value
    one = optimize_krsb(1, spec, params).value
    assert mean <= rs + 3 * err
    assert abs(mean - one) < abs(mean - rs)

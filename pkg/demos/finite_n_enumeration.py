"""Exact enumeration at small N against the infinite-volume value.

For SK at beta = 0.5 and h = 0 the limit is beta**2 / 4 = 0.0625 and the
finite-N averages approach it from below.
"""
from pspin_at import CouplingParams, MixtureSpec, free_energy_mc

sk = MixtureSpec.sk()
params = CouplingParams(0.5)
for N in (6, 8, 10, 12):
    mean, err = free_energy_mc(sk, params, N=N, n_disorder=200, seed=7)
    print(f"N={N:2d}: {mean:.5f} +/- {err:.5f}   (limit 0.0625)")

mean, err = free_energy_mc(MixtureSpec.sk_plus_p(4, 5.0), CouplingParams(0.9), N=10, n_disorder=40, seed=7)
print(f"SK + (5r)^4/4 at beta=0.9, N=10: {mean:.3f} +/- {err:.3f}")

"""The Parisi functional at finite symmetry-breaking depth.

A Dirac measure reproduces the RS formula, the atomic recursion agrees
with a finite-difference PDE solve, and optimising over k-atom measures
gives values that decrease in k.
"""
from pspin_at import CouplingParams, MixtureSpec, RSBMeasure, f_rs, optimize_krsb, parisi_pde_solve, parisi_value, rs_gap
from pspin_at.parisi import PDEGrid

sk = MixtureSpec.sk()
params = CouplingParams(1.6, 0.3)

mu = RSBMeasure.dirac(0.5)
print(f"Dirac at 0.5: parisi={parisi_value(mu, sk, params):.12f}  f_rs={f_rs(sk, params, 0.5):.12f}")

mu = RSBMeasure(((0.2, 0.5), (0.6, 0.5)))
grid = PDEGrid.default(sk, params)
ref = parisi_value(mu, sk, params)
print(f"two atoms: recursion={ref:.8f}")
for g in (grid, grid.refined()):
    print(f"  PDE nx={g.nx:5d}: {parisi_pde_solve(mu, sk, params, g):.8f}")

for k in (1, 2):
    res = optimize_krsb(k, sk, params, seed=0)
    print(f"k={k}: value={res.value:.10f} atoms={[(round(q, 4), round(w, 4)) for q, w in res.measure.atoms]}")

gap = rs_gap(sk, params, k_max=1)
print(f"RS minus 1-RSB gap {gap.gap:.3e}, rs_member={gap.rs_member}")

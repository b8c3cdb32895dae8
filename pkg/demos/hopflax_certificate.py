"""A point inside the AT region that is not replica symmetric.

At zero field the Hopf-Lax bound certifies that the model
``r**2/2 + (C r)**p / p`` has free energy strictly below its RS value once C
is large, even though the AT statistic at the RS minimiser is below one.
The critical temperature found by bisection sits far below the AT point.
For much larger C, t xi0(1) grows like C**4 and the O(1/C**2) gap is lost
to cancellation in double precision.
"""
from pspin_at import CouplingParams, MixtureSpec, beta_c_bisect, counterexample_search, enriched_f1, hopflax_bound, xi0

print(f"enriched f1(l)/l^2 at l=1e-3: {enriched_f1(1e-3) / 1e-6:.5f}")

res = counterexample_search(0.9, 4, (5, 10, 20, 40, 80))
cert = res.certificate
print(f"smallest certified C={res.c_min:g}")
print(f"  RS value {cert.rs_value:.6f}, best bound {cert.best_bound:.6f} at l={cert.best_l:.4g}, margin {cert.margin:.4f}")
print(f"  alpha_min={res.at_report.alpha_min:.6f} at_member={res.at_report.at_member}")
print(f"  1-RSB gap {res.gap_report.gap:.4f} rs_member={res.gap_report.rs_member}")

params = CouplingParams(0.9)
for C in (20.0, 50.0, 200.0):
    spec = MixtureSpec.sk_plus_p(4, C)
    top = params.t * float(xi0(spec, 1.0))
    print(f"  C={C:5.0f}: (bound(1/C) - t xi0(1)) C^2 = {(hopflax_bound(spec, params, 1 / C) - top) * C * C:.4f}")

bc = beta_c_bisect(res.spec, (0.01, 0.9), width=1e-3)
print(f"beta_c for C={res.c_min:g}: {bc:.4f}")

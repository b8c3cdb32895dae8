"""Replica-symmetric free energy and the AT statistic.

For SK at zero field the AT statistic at q = 0 equals beta**2, so the RS
solution turns unstable at beta = 1.  The strongly quartic mixture
``r**2/2 + (5 r)**4 / 4`` has the same statistic at q = 0 but a second RS
minimiser appears far from zero once beta grows.
"""
import numpy as np

from pspin_at import CouplingParams, MixtureSpec, alpha, f_rs, f_rs_d2, rs_minimize

sk = MixtureSpec.sk()
print("SK, h = 0")
for beta in (0.5, 0.9, 1.1, 1.5):
    params = CouplingParams(beta)
    rep = alpha(sk, params)
    print(f"  beta={beta:4.2f}  alpha_min={rep.alpha_min:.6f}  at_member={rep.at_member}"
          f"  f_rs''(0)={f_rs_d2(sk, params, 0.0):+.6f}")

print("SK, beta = 1.5, h = 0.3: f_rs on a grid")
params = CouplingParams(1.5, 0.3)
qs = np.linspace(0, 0.9, 10)
print("  " + "  ".join(f"{v:.5f}" for v in f_rs(sk, params, qs)))
rs = rs_minimize(sk, params)
print(f"  minimisers={rs.minimizers} value={rs.value:.8f} unique={rs.unique}")

model = MixtureSpec.sk_plus_p(4, 5.0)
print("SK + (5r)^4/4, h = 0")
for beta in (0.05, 0.12, 0.16, 0.9):
    params = CouplingParams(beta)
    rs = rs_minimize(model, params)
    rep = alpha(model, params, rs_min=rs)
    print(f"  beta={beta:4.2f}  rs minimisers={[round(q, 4) for q in rs.minimizers]}"
          f"  alpha_min={rep.alpha_min:.4f}")

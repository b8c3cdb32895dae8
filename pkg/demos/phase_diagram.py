"""A small (beta, h) scan of SK written as CSV.

Cells with ``rs_member = 1`` are always inside the AT region; the RS
region ends near the AT line.
"""
import sys

from pspin_at import MixtureSpec, cells_to_csv, phase_grid

cells = phase_grid(MixtureSpec.sk(), (0.6, 1.4), (0.0, 0.4), n_beta=5, n_h=2, k_max=1, seed=0)
sys.stdout.write(cells_to_csv(cells))

"""Numerical tools for mixed p-spin glasses: Parisi functional at finite
symmetry-breaking depth, the generalized AT criterion, the Hopf-Lax upper
bound, and small-N exact enumeration."""
from .errors import (
    BracketError,
    NumericError,
    NumericRangeError,
    PreconditionError,
    PspinError,
    QuadratureError,
    SolverError,
)
from .finite_n import DisorderSample, free_energy_mc, sample_hamiltonian
from .hopflax import (
    BoundReport,
    CounterexampleResult,
    beta_c_bisect,
    best_bound,
    counterexample_search,
    enriched_f1,
    hopflax_bound,
)
from .mixture import (
    CouplingParams,
    MixtureSpec,
    conjugate,
    parse_spec,
    theta,
    xi0,
    xi0_d1,
    xi0_d2,
    xi0_d3,
)
from .parisi import (
    GapReport,
    KRSBResult,
    PDEGrid,
    RSBMeasure,
    optimize_krsb,
    parisi_pde_solve,
    parisi_value,
    rs_gap,
)
from .quad import GaussianRule, expect, gaussian_rule, rule
from .rs_at import ATReport, RSMinimum, alpha, alpha_at, f_rs, f_rs_d2, fixed_point_residual, qstar_set, rs_minimize
from .scan import PhaseCell, RunConfig, Tolerances, cells_to_csv, phase_grid, write_csv

__version__ = "0.1.0"

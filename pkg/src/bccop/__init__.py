"""Certified bound-chain numerics for oriented percolation on the BCC lattice.

The package verifies a computer-assisted bootstrap argument: random-walk
return-probability series with certified truncation tails feed closed-form
diagram bounds, those feed series totals for the expansion coefficients, and
the totals decide whether the three bootstrap diagnostics stay below their
hypothesized constants.  A grid search locates the dimensions and constants
where the argument closes, a Monte Carlo simulator sanity-checks the
probabilistic primitives, and dense grid checks certify the auxiliary
analytic inequalities.
"""

__version__ = "0.1.0"

from .bcc_rw import RwTable, build_table, eps1, eps2, format_upper_7, return_prob
from .bootstrap import (
    GBoundReport,
    Mode,
    SearchSpec,
    Verdict,
    g1_bound,
    g2_bound,
    g3_bound,
    search,
    verify,
)
from .diagram_bounds import (
    BootstrapConstants,
    DiagramBoundSet,
    build_diagram_set,
    bubble_bound,
    triangle_bound,
    weighted_bubble_bound,
)
from .inequality_checks import (
    CheckResult,
    check_cosine_telescope,
    check_d2k,
    check_double_derivative_identity,
    check_green_lower,
    check_mu_bound,
    run_all,
)
from .lace_bounds import LaceBoundReport, totals
from .op_sim import SimConfig, SimStats, exact_dp_1d, exact_two_step, rw_two_point, simulate
from .policy import Policy

__all__ = [
    "__version__",
    "Policy",
    "RwTable",
    "build_table",
    "eps1",
    "eps2",
    "return_prob",
    "format_upper_7",
    "BootstrapConstants",
    "DiagramBoundSet",
    "build_diagram_set",
    "bubble_bound",
    "triangle_bound",
    "weighted_bubble_bound",
    "LaceBoundReport",
    "totals",
    "GBoundReport",
    "Mode",
    "Verdict",
    "SearchSpec",
    "g1_bound",
    "g2_bound",
    "g3_bound",
    "verify",
    "search",
    "CheckResult",
    "check_green_lower",
    "check_mu_bound",
    "check_d2k",
    "check_cosine_telescope",
    "check_double_derivative_identity",
    "run_all",
    "SimConfig",
    "SimStats",
    "simulate",
    "rw_two_point",
    "exact_two_step",
    "exact_dp_1d",
]

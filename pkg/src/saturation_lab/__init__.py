"""Potential-function threshold analysis for scalar and spatially-coupled recursions."""
__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .numerics import DEFAULT_TOL, Bracket, Tolerances
from .system import ScalarSystem, check_admissible, iterate_to_fixed_point, recursion_step
from .single import (
    energy_gap,
    fixed_points,
    hessian_bound,
    min_width,
    potential,
    potential_curve,
    potential_threshold,
    single_threshold,
    threshold_report,
)
from .coupled import (
    CoupledState,
    CouplingMatrix,
    build_basic_matrix,
    build_one_sided_matrix,
    empirical_sc_threshold,
    sc_run_basic,
    sc_run_one_sided,
)
from .models import (
    DegreeDistribution,
    GldpcParams,
    IsiChannel,
    gldpc,
    gldpc_threshold,
    isi_erasure,
    ldpc_bec,
    maxwell_threshold,
)

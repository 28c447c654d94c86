"""Numerics for a log-kernel nonlocal Trudinger-Moser functional on the unit ball."""

from .blowup import (
    SequenceParams,
    SequenceReport,
    SharpProfile,
    cc_tail,
    convergence_report,
    decompose_IJK,
    find_an,
    sharp_sequence,
    solve_An,
    solve_xi,
)
from .constants import (
    DimensionContext,
    Nonlinearity,
    F_log,
    F_value,
    check_g1,
    find_t0,
    make_dimension_context,
    parse_nonlinearity,
)
from .functional import (
    QuadratureConfig,
    QuadratureError,
    phi_minus_bound,
    phi_radial,
    phi_transformed,
    scs_threshold,
    sufficient_condition_verdict,
)
from .optimize import OptimizerConfig, certify_feasible, maximize_phi, project_unit_energy
from .profiles import (
    RadialProfile,
    TransformedProfile,
    dirichlet_radial,
    dirichlet_transformed,
    moser_profile,
    rearrange_decreasing,
    to_radial,
    to_transformed,
)

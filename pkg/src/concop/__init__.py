"""Fourier concentration operators, set thinness and Littlewood-Paley tools."""

__version__ = "0.1.0"

from .sets import (
    IntervalSet,
    SetFamily,
    ThinnessProfile,
    ball_estimate_sup,
    comb_family,
    comb_set,
    family_E1,
    family_E2,
    from_intervals,
    is_eps_thin,
    measure,
    intersect_ball,
    scale_set,
    sup_ratio,
    tail,
    thin_profile,
    thinness_ratio,
    truncate,
)
from .spectral import (
    ConcentrationOp,
    Grid,
    apply_concop,
    block_decomposition,
    frobenius,
    kernel_matrix,
    ls_delta,
    op_norm,
    power_iteration,
    scaling_check,
    spectrum,
    svw_lambda_min,
    tail_norm_curve,
)
from .lpdecomp import (
    LPOperators,
    ScaleStack,
    apply_S,
    apply_T,
    kernel_A,
    kernel_B,
    make_bump,
    phihat,
    schur_integrals,
    smooth_step,
    st_eps_bounds,
)

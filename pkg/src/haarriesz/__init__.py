"""Desk-scale workbench for dyadic Haar projections, Riesz transforms,
multiscale operator decompositions and their interpolatory estimates."""

from .grid import (
    Direction,
    DyadicCube,
    GridFunction,
    all_directions,
    axis_direction,
    embed,
    lp_norm,
)
from .haar import (
    HaarCoefficients,
    bmo_d_norm,
    conditional_expectation,
    directional_project,
    haar_analyze,
    haar_synthesize,
    square_function,
    vector_project,
)
from .fourier import (
    MultiplierOp,
    ResolvingKernel,
    SpectralField,
    delta_conv,
    derivative,
    antiderivative,
    make_kernel_b,
    make_kernel_d,
    riesz,
    riesz_inverse,
    smoothing_conv,
)
from .multiscale import (
    LinearFieldOp,
    OpNormResult,
    PredecessorSplit,
    RingCover,
    default_even_family,
    op_norm2_estimate,
    rearrangement_op,
    rearrangement_operator,
    ring_cover,
    ring_projection,
    ring_projection_operator,
    t_ell,
    t_ell_operator,
    t_ell_riesz_ratio,
    validate_ring_family,
)
from .sharpness import (
    BlockSpec,
    SquareCollection,
    bessel_lower_bound,
    block_inner_products,
    build_collection,
    f_eps_field,
    gram_norm2,
    mother_profiles,
    sharpness_experiment_pge2,
    single_block_experiment_ple2,
)
from .semiconvexity import (
    Integrand,
    VectorField,
    a0_apply,
    check_separately_convex,
    jensen_range_check,
    registry_integrands,
    residual_ratio,
    semicontinuity_experiment,
)

__version__ = "0.1.0"

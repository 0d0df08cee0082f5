"""Desk-scale numerical verification of smoothing-operator calculus on
Gaussian spaces: spectral multipliers, kernel identities, L log L norms,
maximal functions, pathwise oracles, and a constructive Lipschitz
approximation, each check reporting a measured value against a pinned
tolerance."""

from .kernels import (
    SLOPE_KERNEL_MASS_UNIT,
    KernelConfig,
    RateBound,
    averaged_from_increment,
    averaged_kernel,
    increment_identity_residual,
    increment_kernel,
    slope_kernel,
    slope_kernel_mass,
    slope_kernel_mass_pieces,
    smoothing_identity_residual,
    smoothing_rate_slack,
)
from .lusin import (
    C_EMP_DEFAULT,
    C_NUM_DEFAULT,
    AnchorSet,
    LusinReport,
    PairCheckResult,
    TGrid,
    Weak11Result,
    big_M,
    extension_lipschitz_ratio,
    hopf_max,
    lusin_approx,
    lusin_pair_check,
    lusin_sweep,
    mcshane_extend,
    weak11_check,
)
from .mc import (
    HittingSample,
    MartingaleResult,
    MCEstimate,
    OccupationResult,
    PathConfig,
    SubordinationResult,
    VectorMomentResult,
    hitting_cdf,
    martingale_moment_check,
    occupation_check,
    sample_hitting,
    sample_ou,
    subordination_check,
    subordinator_density,
    vector_moment_check,
)
from .mehler import (
    PointwiseFunction,
    gauss_legendre_01,
    lipschitz_bound_check,
    lipschitz_bound_slacks,
    log_convexity_check,
    log_convexity_slacks,
    mehler_apply,
    mehler_apply_batch,
    mehler_apply_mc,
    semigroup_series_grid,
    smoothing_apply,
    smoothing_apply_batch,
    smoothing_log_convexity_check,
    smoothing_log_convexity_slacks,
    smoothing_series_grid,
)
from .model import (
    AdaptiveSpec,
    AxisSpec,
    GaussianModel,
    HermiteSeries,
    QuadratureGrid,
    hermite_eval,
    hermite_table,
    integrate,
    integrate_mc,
    multi_indices_up_to,
    orthonormal_axis_table,
    project,
    series_eval,
)
from .orlicz import (
    NormReport,
    l1_norm,
    luxemburg_norm,
    meyer_forward_check,
    meyer_reverse_check,
    modulus,
    phi,
    phi_product_bound_check,
    poincare_check,
    resolvent_root_l1_check,
    series_roots_1d,
)
from .report import (
    SUITE_NAMES,
    TOOL_NAME,
    TOOL_VERSION,
    RunConfig,
    emit_plot_data,
    load_report,
    run_suites,
    summarize,
    write_report,
)
from .spectral import (
    SpectralMultiplier,
    apply,
    check_commutation,
    dirichlet_pairing,
    eigenvalue,
    gradient,
    hopf_average,
    poisson,
    resolvent,
    semigroup,
    smoothing,
    sqrt_gen,
)

__version__ = TOOL_VERSION

"""covlaw: the law of calibration-conditional coverage in split conformal
prediction, its beta reference, and one-dimensional transport comparisons."""

__version__ = "0.1.0"

from .numerics import (
    DomainError,
    IntegrationResult,
    QuadratureError,
    QuadratureSpec,
    RngStream,
    bivariate_normal_cdf,
    integrate,
    inverse_incomplete_beta,
    regularized_incomplete_beta,
    std_normal_cdf,
    std_normal_pdf,
    std_normal_quantile,
    stream_for,
    uniform_stream,
)
from .laws import (
    BetaLaw,
    ContaminatedLaw,
    EmpiricalLaw,
    PointMass,
    PushforwardLaw,
    UnitLaw,
    beta_reference,
    contaminate,
    empirical_from_samples,
)
from .transport import (
    MonteCarloBound,
    TransportMap,
    W1Result,
    coupling_mc_bound,
    identity_map,
    mean_gap,
    monotone_map,
    w1,
    w1_centered_normals,
    w1_empirical,
    wp,
)
from .conformal import (
    BadCalibrationBound,
    ConformalConfig,
    CoverageBand,
    CoverageBoundError,
    CoverageGapReport,
    DegenerateCoverageError,
    bad_calibration_markov,
    bad_calibration_uniform_shift,
    clustered_law,
    clustered_radius,
    conformal_index,
    counting_tail_w1,
    coverage_gap_report,
    iid_bad_calibration,
    marginal_coverage_band,
)
from .scale_shift import (
    IdentityViolationError,
    ScaleShift,
    exact_w1_identity,
    half_normal_quantile,
    local_shift_gap,
    scale_shift_forward,
    scale_shift_inverse,
    scale_shift_map,
    shifted_coverage,
    shifted_coverage_law,
    transported_density,
)
from .ar1 import (
    Ar1Config,
    BadCalibrationReport,
    BoundChainRow,
    bad_calibration_report,
    berry_esseen_radius,
    bound_chain,
    long_run_sd,
    mc_coverage_law,
    mc_w1_stats,
    realized_coverage_ar1,
    simulate_ar1,
    simulate_coverages,
)

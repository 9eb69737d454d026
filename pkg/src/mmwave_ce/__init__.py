"""Beamspace mmWave channel estimation simulator.

Core library for clustered-channel synthesis, analog sounding, completion and
sparse-recovery solvers, end-to-end estimation pipelines, restricted-isometry
checks, and a Monte-Carlo experiment harness. A FastAPI service wraps the
harness; the CLI is a thin client of that service.
"""

from .arrays import AngleGrid, ArrayConfig, build_dictionary, steering_vector
from .channel import (
    ChannelRealization,
    ClusterChannelConfig,
    draw_channel,
    grid_channel_from_supports,
    measure_sparsity,
    path_gain_rho,
)
from .operators import (
    EntrySamplingOperator,
    MatrixOperator,
    MeasurementOperator,
    SandwichOperator,
    adjoint_mismatch,
    lipschitz_estimate,
)
from .pipelines import (
    EstimateBundle,
    SolverOptions,
    TheoryBoundConfig,
    direct_cs_estimate,
    full_mc_estimate,
    sample_complexity_bounds,
    two_stage_estimate,
)
from .ripcheck import (
    RECOVERY_THRESHOLD,
    RicEstimate,
    empirical_ric,
    exact_recovery_condition,
    sandwich_check,
)
from .solvers import (
    SolverReport,
    fista_l1,
    fista_l1_continuation,
    fpc_complete,
    fpc_complete_discrepancy,
    soft_threshold,
    svd_shrink,
    svt_complete,
)
from .sounding import (
    Codebook,
    ObservationSet,
    gen_mbc_codebook,
    gen_rc_codebook,
    observe,
    sample_support,
    sigma_from_snr,
    size_codebooks,
)

__version__ = "0.1.0"

"""Sampling-set selection and reconstruction for bandlimited graph signals."""

from .baselines import (
    SamplingDistribution,
    invertibility_success,
    leverage_distribution,
    uniform_distribution,
    weighted_sample_without_replacement,
)
from .bayes import (
    BayesianPrior,
    PosteriorState,
    RandomizedGreedyConfig,
    apply_update,
    candidate_count,
    eta_sequence,
    greedy_trace,
    init_posterior,
    lmmse_estimate,
    marginal_gain,
    objective_direct,
    posterior_cov_direct,
    random_prior,
    select_greedy,
    select_randomized_greedy,
)
from .errors import (
    DegenerateSupportError,
    GuardExceededError,
    MatrixMarketError,
    NumericalError,
    SingularMatrixError,
    SymmetryError,
)
from .graphs import erdos_renyi, geometric_graph, grid_uav_graph, uav_network
from .omp import (
    Reconstruction,
    ResidualState,
    SamplingSet,
    error_bound,
    iterative_select,
    reconstruct_gls,
    reconstruct_noiseless,
    recovery_error,
    update_residual,
)
from .rng import RngStream
from .spectral import (
    BandlimitedSignal,
    FrequencySupport,
    GraphMatrix,
    NoiseModel,
    SpectralBasis,
    add_noise,
    build_spectral_basis,
    frequency_submatrix,
    synth_signal,
)
from .support import (
    SignalBatch,
    SupportEstimate,
    adaptive_sample,
    check_identifiability,
    exhaustive_support_oracle,
    adversarial_noise,
    gft_batch,
    identifiability_margin,
    recover_support,
)
from .theory import (
    curvature_lemma_sides,
    curvature_upper_bound,
    empirical_curvature,
    eta_guarantee,
    exhaustive_optimum,
    expectation_bound,
    gwss_check,
)

__version__ = "0.1.0"

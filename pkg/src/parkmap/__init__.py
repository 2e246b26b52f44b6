"""parkmap: online, adaptive parking-availability mapping on a synthetic road.

A mobile platform travels the road, fuses its own noisy readings with
external-source readings through exact Gaussian process regression, keeps the
single most informative sample per iteration, and evicts data made stale by
traffic changes. A paired Monte-Carlo harness compares the approach against
random selection, keep-everything, and platform-only baselines.
"""

__version__ = "0.1.0"

from .environment import (
    RoadConfig,
    SlotLayout,
    TrafficDensity,
    World,
    attenuation,
    evolve_traffic,
    generate_layout,
    generate_traffic,
    prior_availability,
    traffic_at,
    true_pam,
    velocity,
)
from .gp import (
    GpHyperparams,
    GpModel,
    PosteriorSummary,
    fit,
    kernel_matrix,
    log_marginal_likelihood,
    matern_kernel,
    optimize_hyperparameters,
    posterior,
)
from .harness import McSummary, monte_carlo, processing_ratio
from .mapper import (
    INITIAL_HYPERPARAMS,
    Dataset,
    SimState,
    detect_obsolete,
    run_episode,
    step,
)
from .metrics import MetricsRecord, rmse
from .selection import STRATEGIES, CandidateSet, acquisition, select
from .sensing import (
    Measurement,
    NoiseConfig,
    generate_sources,
    observe_gaussian,
    observe_indicator,
)

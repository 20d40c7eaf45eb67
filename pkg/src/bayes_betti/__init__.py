"""Bayesian estimation of Betti numbers from persistence-diagram lifetimes."""

from .estimator import BettiNumberEstimator, NoGapsPartitionModel, RipsPersistence
from .estimators import (
    PosteriorSummary,
    beta_check,
    beta_hat,
    component_overlap,
    kernel_posterior,
    modal_partition,
    start_probabilities,
    summarize,
)
from .experiment import ExperimentConfig, run_experiment
from .homology import (
    PersistenceDiagram,
    build_rips_filtration,
    compute_persistence,
    load_diagram_csv,
    write_diagram_csv,
    zero_dim_persistence,
)
from .lifetimes import LifetimeSample, extract_lifetimes
from .partition_model import (
    Composition,
    NormalGammaParams,
    log_eppf,
    log_marginal_likelihood,
    log_posterior,
)
from .sampler import ChainConfig, ChainOutput, run_chain, split_merge_step, update_theta
from .synthgen import GeneratorConfig, PointCloud, sample_circles, sample_fibonacci_spheres

__version__ = "0.1.0"

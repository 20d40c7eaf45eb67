"""scikit-learn style front end.

``RipsPersistence`` turns a point cloud into a diagram, ``NoGapsPartitionModel``
clusters a set of lifetimes into no-gaps blocks, and ``BettiNumberEstimator``
chains the two and reports the Betti number estimates.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin, clone
from sklearn.utils.validation import check_is_fitted

from ._validation import check_lifetimes, check_point_cloud, resolve_eps_max
from .estimators import (
    PosteriorSummary,
    modal_partition,
    start_probabilities,
    summarize,
)
from .homology import PersistenceDiagram, rips_persistence
from .lifetimes import LifetimeSample, extract_lifetimes
from .partition_model import NormalGammaParams
from .sampler import ChainConfig, run_chain


def _seed_from(random_state) -> int:
    if random_state is None:
        return int(np.random.SeedSequence().entropy % 2**63)
    if isinstance(random_state, (int, np.integer)):
        if random_state < 0:
            raise ValueError("random_state must be a nonnegative integer")
        return int(random_state)
    raise TypeError("random_state must be None or a nonnegative integer")


class RipsPersistence(TransformerMixin, BaseEstimator):
    """Vietoris-Rips persistence of a single point cloud.

    Parameters
    ----------
    max_dim : int, default=1
        Largest simplex dimension. Levels ``0 .. max_dim - 1`` are reported;
        ``max_dim=1`` uses the union-find path for level 0.
    eps_max : "enclosing" or float, default="enclosing"
        Largest filtration radius. ``"enclosing"`` uses 1.05 times half the
        cloud diameter.
    """

    def __init__(self, max_dim=1, eps_max="enclosing"):
        self.max_dim = max_dim
        self.eps_max = eps_max

    def fit(self, X, y=None):
        points = check_point_cloud(X)
        self.eps_max_ = resolve_eps_max(self.eps_max, points)
        self.diagram_ = rips_persistence(points, self.eps_max_, self.max_dim)
        self.n_features_in_ = points.shape[1]
        return self

    def transform(self, X):
        """Rows ``(dim, birth, death)`` of the diagram of ``X``."""
        check_is_fitted(self, "diagram_")
        points = check_point_cloud(X)
        eps = resolve_eps_max(self.eps_max, points)
        return rips_persistence(points, eps, self.max_dim).to_array()


class NoGapsPartitionModel(ClusterMixin, BaseEstimator):
    """Bayesian no-gaps partition of positive lifetimes.

    Lifetimes are sorted and modelled on the log scale as a Dirichlet-process
    mixture of normals whose clusters are runs of consecutive values. The
    posterior over partitions is sampled by split-merge MCMC.

    Parameters
    ----------
    burn_in, samples, thin : int
        Chain length settings; ``samples`` states are retained.
    m, c, a, b : float
        Normal-gamma prior on each block's ``(mu, tau)``.
    theta_alpha, theta_beta : float
        Gamma prior on the total mass ``theta``.
    theta_init : float
        Starting value of ``theta`` (kept fixed when ``update_theta=False``).
    shift_sweeps : int, default=1
        Boundary-shift sweeps per iteration; 0 leaves only split and merge moves.
    random_state : int or None

    Attributes
    ----------
    lifetimes_ : ndarray of shape (n,)
        Sorted lifetimes.
    chain_ : ChainOutput
    modal_ : Composition
    modal_freq_ : float
    start_probabilities_ : dict
        ``S_i`` keyed by 1-based sorted index ``i >= 2``.
    labels_ : ndarray of shape (n,)
        Modal block of every input lifetime, in input order.
    """

    def __init__(
        self,
        burn_in=10_000,
        samples=5_000,
        thin=1,
        m=0.0,
        c=0.5,
        a=1.1,
        b=0.1,
        theta_alpha=1.1,
        theta_beta=0.1,
        theta_init=1.0,
        update_theta=True,
        shift_sweeps=1,
        keep_trace=True,
        random_state=None,
    ):
        self.burn_in = burn_in
        self.samples = samples
        self.thin = thin
        self.m = m
        self.c = c
        self.a = a
        self.b = b
        self.theta_alpha = theta_alpha
        self.theta_beta = theta_beta
        self.theta_init = theta_init
        self.update_theta = update_theta
        self.shift_sweeps = shift_sweeps
        self.keep_trace = keep_trace
        self.random_state = random_state

    @property
    def prior(self) -> NormalGammaParams:
        return NormalGammaParams(self.m, self.c, self.a, self.b)

    def chain_config(self) -> ChainConfig:
        return ChainConfig(
            burn_in=self.burn_in,
            samples=self.samples,
            thin=self.thin,
            ng=self.prior,
            theta_prior=(self.theta_alpha, self.theta_beta),
            theta_init=self.theta_init,
            seed=_seed_from(self.random_state),
            update_theta=self.update_theta,
            keep_trace=self.keep_trace,
            shift_sweeps=self.shift_sweeps,
        )

    def fit(self, X, y=None):
        lifetimes = check_lifetimes(X)
        if lifetimes.size < 2:
            raise ValueError("need at least two lifetimes")
        order = np.argsort(lifetimes, kind="stable")
        self.lifetimes_ = lifetimes[order]
        self.log_lifetimes_ = np.log(self.lifetimes_)
        self.chain_ = run_chain(self.log_lifetimes_, self.chain_config())
        self.modal_, self.modal_freq_ = modal_partition(self.chain_)
        self.start_probabilities_ = start_probabilities(self.chain_)
        labels = np.empty(lifetimes.size, dtype=int)
        labels[order] = self.modal_.labels()
        self.labels_ = labels
        self.n_blocks_ = self.modal_.k
        return self

    def summarize(self, h=0, removed_at_max=0, p0=0.3, tau_overlap=0.03) -> PosteriorSummary:
        check_is_fitted(self, "chain_")
        return summarize(self.chain_, self.log_lifetimes_, self.prior, h, removed_at_max, p0, tau_overlap)


class BettiNumberEstimator(BaseEstimator):
    """Estimate one Betti number of the space a point cloud was sampled from.

    Parameters
    ----------
    homology_dim : int, default=0
        Homology level ``h`` (0, 1 or 2).
    eps_max : "enclosing" or float
    p0 : float, default=0.3
        Start-probability threshold for ``betti_check_``.
    tau_overlap : float, default=0.03
        Overlap at or below which a right-hand block counts as signal.
    partition_model : NoGapsPartitionModel or None
        Template cloned for every fit; ``None`` uses the default settings.

    Attributes
    ----------
    diagram_, lifetimes_, partition_model_, summary_
    betti_hat_ : int
        Estimate from the modal partition.
    betti_check_ : int
        Estimate from the start probabilities.
    """

    def __init__(self, homology_dim=0, eps_max="enclosing", p0=0.3, tau_overlap=0.03, partition_model=None):
        self.homology_dim = homology_dim
        self.eps_max = eps_max
        self.p0 = p0
        self.tau_overlap = tau_overlap
        self.partition_model = partition_model

    def fit(self, X, y=None):
        if self.homology_dim not in (0, 1, 2):
            raise ValueError(f"homology_dim must be 0, 1 or 2, got {self.homology_dim}")
        points = check_point_cloud(X)
        eps = resolve_eps_max(self.eps_max, points)
        diagram = rips_persistence(points, eps, self.homology_dim + 1)
        return self.fit_diagram(diagram)

    def fit_diagram(self, diagram: PersistenceDiagram):
        """Fit from a precomputed diagram."""
        self.diagram_ = diagram
        return self.fit_lifetimes(extract_lifetimes(diagram, self.homology_dim))

    def fit_lifetimes(self, sample: LifetimeSample):
        """Fit from an extracted lifetime sample."""
        if not 0.0 <= self.p0 <= 1.0:
            raise ValueError("p0 must lie in [0, 1]")
        template = self.partition_model if self.partition_model is not None else NoGapsPartitionModel()
        model = clone(template).fit(sample.lifetimes)
        self.lifetimes_ = sample
        self.partition_model_ = model
        self.summary_ = model.summarize(sample.h, sample.removed_at_max, self.p0, self.tau_overlap)
        self.betti_hat_ = self.summary_.beta_hat
        self.betti_check_ = self.summary_.beta_check
        return self

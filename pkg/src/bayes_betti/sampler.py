"""Split-merge Metropolis-Hastings over no-gaps partitions.

The chain state is the list of 0-based block start indices; ``starts[0]`` is
always 0. A split inserts a start, a merge removes one, so only the blocks
touched by a move need their marginal likelihood re-evaluated.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .partition_model import (
    Composition,
    NormalGammaParams,
    block_log_marginal,
    log_eppf,
    log_marginal_likelihood,
)


@dataclass(frozen=True)
class ChainConfig:
    burn_in: int = 10_000
    samples: int = 5_000
    thin: int = 1
    ng: NormalGammaParams = field(default_factory=NormalGammaParams)
    theta_prior: tuple[float, float] = (1.1, 0.1)
    theta_init: float = 1.0
    seed: int = 0
    update_theta: bool = True
    keep_trace: bool = True
    shift_sweeps: int = 1

    def __post_init__(self):
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")
        alpha, beta = self.theta_prior
        if not (alpha > 0 and beta > 0):
            raise ValueError(f"theta prior parameters must be positive, got {self.theta_prior}")
        if not self.theta_init > 0:
            raise ValueError("theta_init must be positive")
        if self.shift_sweeps < 0:
            raise ValueError("shift_sweeps must be >= 0")


class BlockStats:
    """O(1) block sums from prefix sums of shifted log-lifetimes."""

    def __init__(self, y, ng: NormalGammaParams):
        y = np.asarray(y, dtype=float)
        self.n = y.size
        self.ng = ng
        # shifting by the global mean keeps the sum-of-squares subtraction well conditioned
        self.shift = float(y.mean())
        z = y - self.shift
        self._s1 = np.concatenate(([0.0], np.cumsum(z))).tolist()
        self._s2 = np.concatenate(([0.0], np.cumsum(z * z))).tolist()

    def log_marginal(self, lo: int, hi: int) -> float:
        """Log marginal likelihood of items ``lo .. hi-1``."""
        count = hi - lo
        s1 = self._s1[hi] - self._s1[lo]
        zbar = s1 / count
        ss = max(self._s2[hi] - self._s2[lo] - s1 * zbar, 0.0)
        return block_log_marginal(count, zbar + self.shift, ss, self.ng)


@dataclass
class ChainState:
    starts: list[int]
    theta: float
    log_post: float
    n: int

    @property
    def k(self) -> int:
        return len(self.starts)

    @property
    def composition(self) -> Composition:
        return Composition.from_starts(self.starts, self.n)

    @classmethod
    def initial(cls, y, ng: NormalGammaParams, theta: float) -> "ChainState":
        y = np.asarray(y, dtype=float)
        comp = Composition((y.size,))
        lp = log_eppf(comp, theta) + log_marginal_likelihood(y, comp, ng)
        return cls(starts=[0], theta=float(theta), log_post=lp, n=y.size)


def _block_end(starts: list[int], j: int, n: int) -> int:
    return starts[j + 1] if j + 1 < len(starts) else n


def _p_split(k: int, n: int) -> float:
    if k == 1:
        return 1.0
    if k == n:
        return 0.0
    return 0.5


def _n_splittable(starts: list[int], n: int) -> int:
    count = 0
    for j in range(len(starts)):
        if _block_end(starts, j, n) - starts[j] >= 2:
            count += 1
    return count


def split_merge_step(state: ChainState, stats: BlockStats, rng: np.random.Generator) -> bool:
    """Propose one split or merge and accept it by Metropolis-Hastings.

    ``state`` is updated in place; returns whether the proposal was accepted.
    """
    n, starts, k = state.n, state.starts, state.k
    theta = state.theta
    log_theta = math.log(theta)
    if n < 2:
        return False
    p_split = _p_split(k, n)
    do_split = p_split == 1.0 or (p_split > 0.0 and rng.random() < p_split)

    if do_split:
        splittable = [j for j in range(k) if _block_end(starts, j, n) - starts[j] >= 2]
        j = splittable[int(rng.integers(len(splittable)))]
        lo, hi = starts[j], _block_end(starts, j, n)
        size = hi - lo
        cut = lo + 1 + int(rng.integers(size - 1))
        s1, s2 = cut - lo, hi - cut

        d_prior = math.log(size) - math.log(s1) - math.log(s2) + log_theta - math.log(k + 1)
        d_lik = stats.log_marginal(lo, cut) + stats.log_marginal(cut, hi) - stats.log_marginal(lo, hi)
        log_q_fwd = math.log(p_split) - math.log(len(splittable)) - math.log(size - 1)
        log_q_rev = math.log(1.0 - _p_split(k + 1, n)) - math.log(k)
        log_ratio = d_prior + d_lik + log_q_rev - log_q_fwd
        if log_ratio >= 0 or rng.random() < math.exp(log_ratio):
            starts.insert(j + 1, cut)
            state.log_post += d_prior + d_lik
            return True
        return False

    p_merge = 1.0 - p_split
    j = int(rng.integers(k - 1))
    lo, mid, hi = starts[j], starts[j + 1], _block_end(starts, j + 1, n)
    s1, s2, size = mid - lo, hi - mid, hi - lo

    d_prior = math.log(s1) + math.log(s2) - math.log(size) - log_theta + math.log(k)
    d_lik = stats.log_marginal(lo, hi) - stats.log_marginal(lo, mid) - stats.log_marginal(mid, hi)
    k_s_merged = _n_splittable(starts, n) - (s1 >= 2) - (s2 >= 2) + 1
    log_q_fwd = math.log(p_merge) - math.log(k - 1)
    log_q_rev = math.log(_p_split(k - 1, n)) - math.log(k_s_merged) - math.log(size - 1)
    log_ratio = d_prior + d_lik + log_q_rev - log_q_fwd
    if log_ratio >= 0 or rng.random() < math.exp(log_ratio):
        del starts[j + 1]
        state.log_post += d_prior + d_lik
        return True
    return False


def shift_step(state: ChainState, stats: BlockStats, rng: np.random.Generator, j: int) -> bool:
    """Move the boundary opening block ``j`` (``1 <= j < k``) to a uniform new spot.

    The new start is drawn uniformly among the positions that keep blocks
    ``j-1`` and ``j`` nonempty, so the proposal is symmetric and the block
    count, hence the prior's ``theta`` terms, is unchanged.
    """
    starts, n = state.starts, state.n
    lo, old, hi = starts[j - 1], starts[j], _block_end(starts, j, n)
    if hi - lo < 3:
        return False
    new = lo + 1 + int(rng.integers(hi - lo - 1))
    if new == old:
        return False
    d_prior = math.log(old - lo) + math.log(hi - old) - math.log(new - lo) - math.log(hi - new)
    d_lik = (
        stats.log_marginal(lo, new) + stats.log_marginal(new, hi)
        - stats.log_marginal(lo, old) - stats.log_marginal(old, hi)
    )
    log_ratio = d_prior + d_lik
    if log_ratio >= 0 or rng.random() < math.exp(log_ratio):
        starts[j] = new
        state.log_post += log_ratio
        return True
    return False


def update_theta(theta: float, k: int, n: int, alpha: float, beta: float, rng: np.random.Generator) -> float:
    """Draw the DP total mass from its auxiliary-variable conditional.

    ``eta ~ Beta(theta + 1, n)``, then a two-component gamma mixture with
    shared rate ``beta - log(eta)``.
    """
    eta = rng.beta(theta + 1.0, n)
    # guard the measure-zero underflow eta == 0
    eta = max(eta, np.finfo(float).tiny)
    rate = beta - math.log(eta)
    odds = (alpha + k - 1.0) / (n * rate)
    q = odds / (1.0 + odds)
    shape = alpha + k if rng.random() < q else alpha + k - 1.0
    return float(rng.gamma(shape, 1.0 / rate))


@dataclass
class ChainOutput:
    n: int
    samples: int
    composition_counts: dict[tuple[int, ...], int]
    start_counts: np.ndarray
    theta_trace: np.ndarray | None
    acceptance_rate: float
    config: ChainConfig | None = None

    def to_dict(self, include_trace: bool = True) -> dict:
        counts = sorted(self.composition_counts.items(), key=lambda kv: (-kv[1], len(kv[0]), kv[0]))
        out = {
            "n": self.n,
            "samples": self.samples,
            "acceptance_rate": self.acceptance_rate,
            "composition_counts": [{"sizes": list(sizes), "count": c} for sizes, c in counts],
            "start_counts": [int(v) for v in self.start_counts],
        }
        if include_trace and self.theta_trace is not None:
            out["theta_trace"] = [float(t) for t in self.theta_trace]
        if self.config is not None:
            cfg = self.config
            out["config"] = {
                "burn_in": cfg.burn_in,
                "samples": cfg.samples,
                "thin": cfg.thin,
                "ng": dict(zip("mcab", cfg.ng.as_tuple())),
                "theta_prior": list(cfg.theta_prior),
                "theta_init": cfg.theta_init,
                "seed": cfg.seed,
                "update_theta": cfg.update_theta,
                "shift_sweeps": cfg.shift_sweeps,
            }
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ChainOutput":
        counts = {tuple(int(s) for s in e["sizes"]): int(e["count"]) for e in d["composition_counts"]}
        trace = d.get("theta_trace")
        config = None
        if "config" in d:
            c = d["config"]
            config = ChainConfig(
                burn_in=int(c["burn_in"]),
                samples=int(c["samples"]),
                thin=int(c["thin"]),
                ng=NormalGammaParams(**{k: float(v) for k, v in c["ng"].items()}),
                theta_prior=tuple(float(v) for v in c["theta_prior"]),
                theta_init=float(c["theta_init"]),
                seed=int(c["seed"]),
                update_theta=bool(c.get("update_theta", True)),
                shift_sweeps=int(c.get("shift_sweeps", 1)),
            )
        return cls(
            n=int(d["n"]),
            samples=int(d["samples"]),
            composition_counts=counts,
            start_counts=np.asarray(d["start_counts"], dtype=np.int64),
            theta_trace=None if trace is None else np.asarray(trace, dtype=float),
            acceptance_rate=float(d["acceptance_rate"]),
            config=config,
        )

    def to_json(self, include_trace: bool = True) -> str:
        return json.dumps(self.to_dict(include_trace=include_trace))


def run_chain(y, cfg: ChainConfig) -> ChainOutput:
    """Run the partition chain on nondecreasing log-lifetimes ``y``."""
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size < 2:
        raise ValueError("need at least two log-lifetimes to run the chain")
    if not np.all(np.isfinite(y)):
        raise ValueError("log-lifetimes must be finite")
    if np.any(np.diff(y) < 0):
        raise ValueError("log-lifetimes must be sorted in nondecreasing order")
    n = y.size
    rng = np.random.default_rng(cfg.seed)
    stats = BlockStats(y, cfg.ng)
    state = ChainState.initial(y, cfg.ng, cfg.theta_init)
    alpha, beta = cfg.theta_prior

    counts: Counter = Counter()
    start_counts = np.zeros(n, dtype=np.int64)
    trace = np.empty(cfg.samples) if cfg.keep_trace else None
    accepted = 0
    total = cfg.burn_in + cfg.samples * cfg.thin
    kept = 0
    for it in range(total):
        accepted += split_merge_step(state, stats, rng)
        for _ in range(cfg.shift_sweeps):
            for j in range(1, state.k):
                shift_step(state, stats, rng, j)
        if cfg.update_theta:
            new_theta = update_theta(state.theta, state.k, n, alpha, beta, rng)
            # prior term of the cached log posterior depends on theta
            state.log_post += state.k * (math.log(new_theta) - math.log(state.theta)) - (
                math.lgamma(new_theta + n) - math.lgamma(new_theta) - math.lgamma(state.theta + n) + math.lgamma(state.theta)
            )
            state.theta = new_theta
        if it >= cfg.burn_in and (it - cfg.burn_in + 1) % cfg.thin == 0:
            counts[tuple(np.diff(state.starts + [n]).tolist())] += 1
            start_counts[state.starts] += 1
            if trace is not None:
                trace[kept] = state.theta
            kept += 1

    return ChainOutput(
        n=n,
        samples=kept,
        composition_counts=dict(counts),
        start_counts=start_counts,
        theta_trace=trace,
        acceptance_rate=accepted / total if total else 0.0,
        config=cfg,
    )

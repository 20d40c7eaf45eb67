"""Posterior summaries of a partition chain and the two Betti number estimates."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .partition_model import Composition, NormalGammaParams
from .sampler import ChainOutput

OVERLAP_GRID_POINTS = 100_000
OVERLAP_GRID_HALF_WIDTH = 8.0


@dataclass(frozen=True)
class KernelParams:
    mu: float
    tau: float

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")

    @property
    def sd(self) -> float:
        return float(1.0 / np.sqrt(self.tau))


@dataclass
class PosteriorSummary:
    level: int
    n: int
    modal: Composition
    modal_freq: float
    S: dict[int, float]
    overlaps: list[float]
    signal_hat: int
    signal_check: int
    correction: int
    p0: float
    tau_overlap: float

    @property
    def beta_hat(self) -> int:
        return self.signal_hat + self.correction

    @property
    def beta_check(self) -> int:
        return self.signal_check + self.correction

    def to_dict(self, min_s: float = 0.01) -> dict:
        return {
            "level": self.level,
            "n": self.n,
            "modal_sizes": list(self.modal.sizes),
            "modal_freq": self.modal_freq,
            "overlaps": list(self.overlaps),
            "S": {str(i): p for i, p in self.S.items() if p >= min_s},
            "beta_hat": self.beta_hat,
            "beta_check": self.beta_check,
            "signal_hat": self.signal_hat,
            "signal_check": self.signal_check,
            "correction": self.correction,
            "p0": self.p0,
            "tau_overlap": self.tau_overlap,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "PosteriorSummary":
        n = int(d["n"])
        sparse = {int(i): float(p) for i, p in d["S"].items()}
        return cls(
            level=int(d["level"]),
            n=n,
            modal=Composition(tuple(d["modal_sizes"])),
            modal_freq=float(d["modal_freq"]),
            S={i: sparse.get(i, 0.0) for i in range(2, n + 1)},
            overlaps=[float(v) for v in d["overlaps"]],
            signal_hat=int(d["signal_hat"]),
            signal_check=int(d["signal_check"]),
            correction=int(d["correction"]),
            p0=float(d["p0"]),
            tau_overlap=float(d["tau_overlap"]),
        )


def modal_partition(out: ChainOutput) -> tuple[Composition, float]:
    """Most visited composition; ties go to fewer blocks, then the smaller size tuple."""
    if not out.composition_counts:
        raise ValueError("chain output has no retained compositions")
    sizes, count = min(out.composition_counts.items(), key=lambda kv: (-kv[1], len(kv[0]), kv[0]))
    return Composition(sizes), count / out.samples


def start_probabilities(out: ChainOutput) -> dict[int, float]:
    """``S_i`` for 1-based items ``i = 2..n``: share of samples where item ``i`` opens a block."""
    if out.samples < 1:
        raise ValueError("chain output has no retained samples")
    counts = np.asarray(out.start_counts)
    return {i: float(counts[i - 1]) / out.samples for i in range(2, out.n + 1)}


def kernel_posterior(y_block, ng: NormalGammaParams) -> NormalGammaParams:
    """Conjugate normal-gamma update of ``(m, c, a, b)`` given one block of log-lifetimes."""
    y_block = np.asarray(y_block, dtype=float)
    if y_block.size == 0:
        raise ValueError("empty block")
    n = y_block.size
    ybar = float(y_block.mean())
    ss = float(((y_block - ybar) ** 2).sum())
    nc1 = n * ng.c + 1.0
    return NormalGammaParams(
        m=(n * ng.c * ybar + ng.m) / nc1,
        c=ng.c / nc1,
        a=n / 2.0 + ng.a,
        b=ss / 2.0 + n * (ybar - ng.m) ** 2 / (2.0 * nc1) + ng.b,
    )


def block_kernels(modal: Composition, y, ng: NormalGammaParams) -> list[KernelParams]:
    """Posterior-mean normal kernel ``(m', a'/b')`` of every block."""
    y = np.asarray(y, dtype=float)
    kernels = []
    for block in modal.blocks():
        post = kernel_posterior(y[block], ng)
        kernels.append(KernelParams(mu=post.m, tau=post.a / post.b))
    return kernels


def component_overlap(modal: Composition, y, ng: NormalGammaParams, grid_points: int = OVERLAP_GRID_POINTS) -> list[float]:
    """Overlap ``int min(w_j f_j, w_{j+1} f_{j+1})`` of consecutive weighted kernels.

    Integrated on the log-lifetime axis by the trapezoid rule; weights are
    the block proportions ``n_j / n``.
    """
    if modal.k < 2:
        raise ValueError("overlaps need at least two blocks")
    y = np.asarray(y, dtype=float)
    if y.size != modal.n:
        raise ValueError(f"y has {y.size} entries but the composition covers {modal.n} items")
    kernels = block_kernels(modal, y, ng)
    mus = np.array([kp.mu for kp in kernels])
    sds = np.array([kp.sd for kp in kernels])
    weights = np.asarray(modal.sizes, dtype=float) / modal.n
    width = OVERLAP_GRID_HALF_WIDTH * sds.max()
    grid = np.linspace(mus.min() - width, mus.max() + width, grid_points)
    overlaps = []
    prev = weights[0] * norm.pdf(grid, mus[0], sds[0])
    for j in range(1, modal.k):
        cur = weights[j] * norm.pdf(grid, mus[j], sds[j])
        overlaps.append(float(np.trapezoid(np.minimum(prev, cur), grid)))
        prev = cur
    return overlaps


def beta_hat(modal: Composition, overlaps, h: int, removed_at_max: int, tau_overlap: float = 0.03) -> int:
    """Modal-partition estimate.

    Blocks are absorbed into the signal from the right while the overlap with
    their left neighbour stays at or below ``tau_overlap``. The leftmost block
    never counts as signal. Level 0 adds the components that survive to
    ``eps_max``.
    """
    signal = _signal_from_overlaps(modal, overlaps, tau_overlap)
    return signal + (removed_at_max if h == 0 else 0)


def _signal_from_overlaps(modal: Composition, overlaps, tau_overlap: float) -> int:
    overlaps = list(overlaps)
    if len(overlaps) != modal.k - 1:
        raise ValueError(f"expected {modal.k - 1} overlaps, got {len(overlaps)}")
    signal = 0
    for j in range(modal.k - 1, 0, -1):
        if overlaps[j - 1] > tau_overlap:
            break
        signal += modal.sizes[j]
    return signal


def beta_check(S: dict[int, float], p0: float, h: int, removed_at_max: int, n: int | None = None) -> int:
    """Start-probability estimate ``n - max{i >= 2 : S_i >= p0} + 1``.

    ``n`` defaults to the largest index in ``S``.
    """
    if not 0.0 <= p0 <= 1.0:
        raise ValueError("p0 must lie in [0, 1]")
    signal = _signal_from_starts(S, p0, n)
    return signal + (removed_at_max if h == 0 else 0)


def _signal_from_starts(S: dict[int, float], p0: float, n: int | None) -> int:
    if n is None:
        n = max(S, default=1)
    hits = [i for i, p in S.items() if i >= 2 and p >= p0]
    if not hits:
        return 0
    return n - max(hits) + 1


def summarize(
    out: ChainOutput,
    y,
    ng: NormalGammaParams,
    h: int,
    removed_at_max: int,
    p0: float = 0.3,
    tau_overlap: float = 0.03,
) -> PosteriorSummary:
    """Bundle the modal partition, ``S_i``, overlaps and both estimates."""
    modal, freq = modal_partition(out)
    S = start_probabilities(out)
    overlaps = component_overlap(modal, y, ng) if modal.k >= 2 else []
    correction = removed_at_max if h == 0 else 0
    return PosteriorSummary(
        level=h,
        n=out.n,
        modal=modal,
        modal_freq=freq,
        S=S,
        overlaps=overlaps,
        signal_hat=_signal_from_overlaps(modal, overlaps, tau_overlap),
        signal_check=_signal_from_starts(S, p0, out.n),
        correction=correction,
        p0=p0,
        tau_overlap=tau_overlap,
    )

"""No-gaps random partition model for sorted log-lifetimes.

A no-gaps partition of ``n`` ordered items is a partition whose blocks are runs
of consecutive items, so it is fully described by the ordered block sizes
``(n_1, ..., n_k)``. The prior is the Dirichlet-process EPPF restricted to such
partitions and each block carries a normal kernel on ``y = log(lifetime)`` with
a conjugate normal-gamma prior, which lets the kernel parameters be integrated
out in closed form.

Everything is computed in natural-log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Sequence

import numpy as np
from scipy.special import gammaln

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class Composition:
    """Ordered block sizes of a no-gaps partition."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if not sizes:
            raise ValueError("a composition needs at least one block")
        if any(s < 1 for s in sizes):
            raise ValueError(f"block sizes must be positive, got {sizes}")
        object.__setattr__(self, "sizes", sizes)

    @property
    def n(self) -> int:
        return sum(self.sizes)

    @property
    def k(self) -> int:
        return len(self.sizes)

    @property
    def starts(self) -> tuple[int, ...]:
        """0-based index of the first item of every block."""
        out, acc = [], 0
        for s in self.sizes:
            out.append(acc)
            acc += s
        return tuple(out)

    def blocks(self) -> list[slice]:
        return [slice(st, st + s) for st, s in zip(self.starts, self.sizes)]

    def labels(self) -> np.ndarray:
        """Block index of each item, in item order."""
        return np.repeat(np.arange(self.k), self.sizes)

    @classmethod
    def from_starts(cls, starts: Sequence[int], n: int) -> "Composition":
        bounds = list(starts) + [n]
        return cls(tuple(b - a for a, b in zip(bounds[:-1], bounds[1:])))


@dataclass(frozen=True)
class NormalGammaParams:
    """Normal-gamma prior ``mu | tau ~ N(m, c / tau)``, ``tau ~ Ga(a, rate=b)``."""

    m: float = 0.0
    c: float = 0.5
    a: float = 1.1
    b: float = 0.1

    def __post_init__(self):
        for name in ("c", "a", "b"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"normal-gamma parameter {name!r} must be positive, got {value}")
        if not math.isfinite(self.m):
            raise ValueError(f"normal-gamma parameter 'm' must be finite, got {self.m}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.m, self.c, self.a, self.b)


def iter_compositions(n: int) -> Iterator[Composition]:
    """Yield all ``2**(n-1)`` compositions of ``n``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    for k in range(n):
        for cuts in combinations(range(1, n), k):
            yield Composition.from_starts((0,) + cuts, n)


def log_rising_factorial(x: float, n: int) -> float:
    """``log(x (x+1) ... (x+n-1))`` for ``x > 0``."""
    return float(gammaln(x + n) - gammaln(x))


def log_eppf(comp: Composition, theta: float) -> float:
    """Log prior probability of a no-gaps partition.

    The multinomial coefficient times ``prod Gamma(n_j)`` collapses to
    ``n! / prod n_j``, so no large intermediate is ever formed.
    """
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")
    n, k = comp.n, comp.k
    sizes = np.asarray(comp.sizes, dtype=float)
    return float(
        gammaln(n + 1.0)
        - np.log(sizes).sum()
        + k * math.log(theta)
        - gammaln(k + 1.0)
        - log_rising_factorial(theta, n)
    )


def block_log_marginal(count: int, mean: float, ss: float, ng: NormalGammaParams) -> float:
    """Log marginal likelihood of one block from its size, mean and sum of squared deviations."""
    m, c, a, b = ng.m, ng.c, ng.a, ng.b
    half = 0.5 * count + a
    nc1 = count * c + 1.0
    rate = 0.5 * ss + count * (mean - m) ** 2 / (2.0 * nc1) + b
    return (
        a * math.log(b)
        + math.lgamma(half)
        - math.lgamma(a)
        - 0.5 * count * _LOG_2PI
        - 0.5 * math.log(nc1)
        - half * math.log(rate)
    )


def log_marginal_likelihood(y, comp: Composition, ng: NormalGammaParams) -> float:
    """Log marginal likelihood of log-lifetimes ``y`` under ``comp``, blockwise."""
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.shape[0] != comp.n:
        raise ValueError(f"y has {y.size} entries but the composition covers {comp.n} items")
    total = 0.0
    for block in comp.blocks():
        yb = y[block]
        mean = float(yb.mean())
        ss = float(((yb - mean) ** 2).sum())
        total += block_log_marginal(yb.size, mean, ss, ng)
    return total


def log_posterior(comp: Composition, y, ng: NormalGammaParams, theta: float) -> float:
    """Unnormalized log posterior of a composition."""
    return log_eppf(comp, theta) + log_marginal_likelihood(y, comp, ng)

"""Continuous type distributions, reduced to the discrete solvers by quantile binning.

The support ``[lower, upper]`` is cut into ``n`` bins of equal probability
mass, each bin becomes one discrete type with ``beta = 1/n``, and the type
value is the conditional mean of the bin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from contract_forge.contracts import solve
from contract_forge.model import MarketParams, ScenarioKind, SolveReport, TypeProfile

__all__ = [
    "DistributionKind",
    "TypeDistribution",
    "discretize",
    "bin_edges",
    "solve_continuous",
    "step_function",
]


class DistributionKind(Enum):
    UNIFORM = "uniform"
    PIECEWISE_LINEAR_CDF = "piecewise_linear_cdf"


@dataclass(frozen=True)
class TypeDistribution:
    """Distribution of capability on ``[lower, upper]``.

    Build instances with :meth:`uniform` or :meth:`piecewise_linear`. For the
    piecewise-linear kind, ``knots`` and ``levels`` hold the CDF breakpoints;
    the density is constant between consecutive knots.
    """

    lower: float
    upper: float
    kind: DistributionKind
    knots: tuple[float, ...]
    levels: tuple[float, ...]

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise ValueError("support bounds must be finite")
        if not 0.0 < self.lower < self.upper:
            raise ValueError("support must satisfy 0 < lower < upper")
        x = np.asarray(self.knots, dtype=float)
        f = np.asarray(self.levels, dtype=float)
        if x.shape != f.shape or x.size < 2:
            raise ValueError("knots and levels must have equal length >= 2")
        if x[0] != self.lower or x[-1] != self.upper:
            raise ValueError("knots must start at lower and end at upper")
        if np.any(np.diff(x) <= 0.0):
            raise ValueError("knots must be strictly increasing")
        if f[0] != 0.0 or f[-1] != 1.0:
            raise ValueError("cdf must be 0 at lower and 1 at upper")
        if np.any(np.diff(f) <= 0.0):
            raise ValueError("cdf must be strictly increasing")

    @classmethod
    def uniform(cls, lower: float, upper: float) -> "TypeDistribution":
        return cls(float(lower), float(upper), DistributionKind.UNIFORM,
                   (float(lower), float(upper)), (0.0, 1.0))

    @classmethod
    def piecewise_linear(cls, knots: Sequence[float], levels: Sequence[float]) -> "TypeDistribution":
        knots = tuple(float(x) for x in knots)
        return cls(knots[0], knots[-1], DistributionKind.PIECEWISE_LINEAR_CDF,
                   knots, tuple(float(f) for f in levels))

    @property
    def cdf(self) -> Callable[[np.ndarray], np.ndarray]:
        return lambda x: np.interp(x, self.knots, self.levels)

    def ppf(self, q):
        return np.interp(q, self.levels, self.knots)


def bin_edges(dist: TypeDistribution, n: int) -> np.ndarray:
    """Type-space edges of ``n`` equal-mass bins."""
    if n < 1:
        raise ValueError("n must be at least 1")
    edges = dist.ppf(np.linspace(0.0, 1.0, n + 1))
    edges[0], edges[-1] = dist.lower, dist.upper
    return edges


def _conditional_means(dist: TypeDistribution, edges: np.ndarray) -> np.ndarray:
    if dist.kind is DistributionKind.UNIFORM:
        return 0.5 * (edges[:-1] + edges[1:])
    # density is constant between knots, so split each bin at the knots and
    # weight the piece midpoints by their mass
    knots = np.asarray(dist.knots)
    means = np.empty(edges.size - 1)
    for b in range(edges.size - 1):
        lo, hi = edges[b], edges[b + 1]
        inner = knots[(knots > lo) & (knots < hi)]
        pts = np.concatenate(([lo], inner, [hi]))
        mass = np.diff(dist.cdf(pts))
        mids = 0.5 * (pts[:-1] + pts[1:])
        means[b] = np.dot(mass, mids) / mass.sum()
    return means


def discretize(dist: TypeDistribution, n: int, nodes: str = "mean") -> TypeProfile:
    """Equal-mass discretization into a :class:`TypeProfile` with ``beta_i = 1/n``.

    Parameters
    ----------
    nodes : {"mean", "linspace"}
        ``"mean"`` places each type at its bin's conditional mean. ``"linspace"``
        places types at ``linspace(lower, upper, n)`` instead, which gives
        ``theta_i = i`` for the uniform distribution on ``[1, n]``.
    """
    edges = bin_edges(dist, n)
    if nodes == "mean":
        thetas = _conditional_means(dist, edges)
    elif nodes == "linspace":
        thetas = np.linspace(dist.lower, dist.upper, n) if n > 1 else np.array([0.5 * (dist.lower + dist.upper)])
    else:
        raise ValueError(f"unknown node placement {nodes!r}")
    return TypeProfile(tuple(thetas.tolist()), (1.0 / n,) * n)


def solve_continuous(
    dist: TypeDistribution,
    params: MarketParams,
    n: int,
    regime: ScenarioKind = ScenarioKind.JOINT,
    nodes: str = "mean",
) -> SolveReport:
    """Solve the discretized problem; the report carries the bin edges."""
    profile = discretize(dist, n, nodes)
    report = solve(profile, params, regime)
    return replace(report, bin_edges=tuple(bin_edges(dist, n).tolist()))


def step_function(report: SolveReport, theta) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate the piecewise-constant ``(t(theta), r(theta))`` of a continuous solve."""
    if report.bin_edges is None:
        raise ValueError("report has no bin edges; use solve_continuous")
    edges = np.asarray(report.bin_edges)
    idx = np.clip(np.searchsorted(edges, np.asarray(theta, dtype=float), side="right") - 1,
                  0, len(report.menu) - 1)
    return report.menu.down_payments[idx], report.menu.installments[idx]

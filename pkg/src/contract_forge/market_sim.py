"""Monte Carlo execution of a contract menu, plus the Shannon link-rate mapping.

Each trial draws an SU type from the prior, lets it pick the contract that
maximizes its payoff, sets its effort, draws a Bernoulli transmission outcome
with probability ``theta * e`` (clamped to [0, 1]) and settles payments: the
down payment always, the installment only on success.

Randomness comes from fixed-size trial blocks, each with its own generator
keyed by ``(seed, block index)``. Blocks are independent, so results do not
depend on how many workers evaluate them.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from contract_forge.contracts import check_constraints
from contract_forge.model import (
    TOL,
    ContractMenu,
    MarketParams,
    ScenarioKind,
    TypeProfile,
    best_effort,
    default_fixed_effort,
)

__all__ = [
    "BLOCK_SIZE",
    "THREADS_ENV",
    "SimConfig",
    "SimStats",
    "LinkParams",
    "data_rate",
    "select_contract",
    "run_simulation",
    "worker_count",
]

logger = logging.getLogger(__name__)

BLOCK_SIZE = 8192
THREADS_ENV = "CONTRACT_FORGE_THREADS"


def worker_count() -> int:
    """Parallelism cap from ``CONTRACT_FORGE_THREADS`` (default: CPU count)."""
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            logger.warning("ignoring non-integer %s=%r", THREADS_ENV, raw)
    return os.cpu_count() or 1


@dataclass(frozen=True)
class LinkParams:
    """Physical-layer parameters of one SU link."""

    bandwidth: float
    power: float
    channel_gain: float
    gain_exponent: float
    distance: float
    noise: float

    def __post_init__(self) -> None:
        positive = (self.bandwidth, self.power, self.channel_gain, self.distance, self.noise)
        if not all(math.isfinite(v) and v > 0.0 for v in positive):
            raise ValueError("bandwidth, power, channel_gain, distance and noise must be positive")
        if not (math.isfinite(self.gain_exponent) and self.gain_exponent >= 0.0):
            raise ValueError("gain_exponent must be nonnegative")


def data_rate(link: LinkParams) -> float:
    """Achievable rate ``W log2(1 + p |h|^k / (d N0))`` in bits/s."""
    snr = link.power * abs(link.channel_gain) ** link.gain_exponent / (link.distance * link.noise)
    rate = link.bandwidth * math.log2(1.0 + snr)
    if not math.isfinite(rate):
        raise ValueError("data rate is not finite")
    return rate


def select_contract(
    theta: float,
    menu: ContractMenu,
    params: MarketParams,
    true_index: Optional[int] = None,
    tol: float = TOL,
) -> int:
    """Index of the contract maximizing ``[theta (R - r_j)]^2 / (2c) - t_j``.

    Contracts within ``tol`` of the best payoff count as tied; binding
    incentive constraints make such ties exact up to rounding. Ties go to
    ``true_index`` when it is among them, otherwise to the lowest index.
    """
    R, c = params.revenue, params.cost
    values = [(theta * (R - k.installment)) ** 2 / (2.0 * c) - k.down_payment for k in menu]
    best = max(values)
    if true_index is not None and values[true_index] >= best - tol:
        return true_index
    return next(j for j, v in enumerate(values) if v >= best - tol)


@dataclass(frozen=True)
class SimConfig:
    trials: int
    seed: int = 0
    clamp_probability: bool = True
    regime: ScenarioKind = ScenarioKind.JOINT

    def __post_init__(self) -> None:
        if int(self.trials) < 1:
            raise ValueError("trials must be at least 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class SimStats:
    """Realized-payoff statistics.

    Standard errors are ``None`` where fewer than two observations exist.
    Per-type entries are ``None`` for types that were never drawn.
    """

    trials: int
    mean_pu_payoff: float
    pu_payoff_stderr: Optional[float]
    mean_su_payoff_by_type: tuple[Optional[float], ...]
    su_payoff_stderr_by_type: tuple[Optional[float], ...]
    success_rate_by_type: tuple[Optional[float], ...]
    success_rate_stderr_by_type: tuple[Optional[float], ...]
    draws_by_type: tuple[int, ...]
    chosen_contract_by_type: tuple[int, ...]
    clamp_events: int
    warnings: tuple[str, ...] = field(default=())


def _block(seed, index, size, cum_beta, pu_by_type, su_fail, su_gain, p_by_type):
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))
    u_type = rng.random(size)
    u_success = rng.random(size)
    types = np.minimum(np.searchsorted(cum_beta, u_type, side="right"), len(cum_beta) - 1)
    success = u_success < p_by_type[types]
    pu = pu_by_type[0][types] + np.where(success, pu_by_type[1][types], 0.0)
    su = su_fail[types] + np.where(success, su_gain[types], 0.0)
    return types, success, pu, su


def _mean_se(x):
    if x.size == 0:
        return None, None
    mean = float(np.mean(x))
    if x.size < 2:
        return mean, None
    return mean, float(np.std(x, ddof=1) / math.sqrt(x.size))


def run_simulation(
    menu: ContractMenu,
    profile: TypeProfile,
    params: MarketParams,
    config: SimConfig,
) -> SimStats:
    """Simulate ``config.trials`` independent contract executions.

    Raises ``ValueError`` when clamping is disabled and some type's success
    probability ``theta * e`` falls outside ``[0, 1]``.
    """
    if len(menu) != profile.n:
        raise ValueError("menu and profile differ in length")
    regime = ScenarioKind.parse(config.regime)
    warnings: list[str] = []
    audit = check_constraints(menu, profile, params, regime)
    if not audit.feasible:
        msg = "menu violates participation or incentive constraints"
        logger.warning(msg)
        warnings.append(msg)

    R, c = params.revenue, params.cost
    n = profile.n
    choice = [select_contract(th, menu, params, true_index=i) for i, th in enumerate(profile.thetas)]
    e_fixed = default_fixed_effort(profile, params) if regime is ScenarioKind.MORAL_HAZARD_ONLY else None
    t = np.empty(n)
    r = np.empty(n)
    e = np.empty(n)
    raw_p = np.empty(n)
    for i, th in enumerate(profile.thetas):
        k = menu[choice[i]]
        t[i], r[i] = k.down_payment, k.installment
        e[i] = e_fixed if e_fixed is not None else best_effort(th, k.installment, params)
        raw_p[i] = th * e[i]

    out_of_range = (raw_p > 1.0) | (raw_p < 0.0)
    if out_of_range.any():
        if not config.clamp_probability:
            bad = [i for i in range(n) if out_of_range[i]]
            raise ValueError(f"success probability outside [0, 1] for types {bad} with clamping off")
        msg = f"theta*e > 1 clamped to 1 for types {[i for i in range(n) if out_of_range[i]]}"
        logger.warning(msg)
        warnings.append(msg)
    p = np.clip(raw_p, 0.0, 1.0)

    cum_beta = np.cumsum(profile.betas)
    su_fail = -t - 0.5 * c * e * e
    su_gain = R - r
    trials = int(config.trials)
    sizes = [min(BLOCK_SIZE, trials - s) for s in range(0, trials, BLOCK_SIZE)]
    args = [(int(config.seed), b, size, cum_beta, (t, r), su_fail, su_gain, p) for b, size in enumerate(sizes)]
    workers = min(worker_count(), len(args))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(lambda a: _block(*a), args))
    else:
        blocks = [_block(*a) for a in args]
    types = np.concatenate([b[0] for b in blocks])
    success = np.concatenate([b[1] for b in blocks])
    pu = np.concatenate([b[2] for b in blocks])
    su = np.concatenate([b[3] for b in blocks])

    mean_pu, se_pu = _mean_se(pu)
    su_mean, su_se, rate, rate_se, draws = [], [], [], [], []
    for i in range(n):
        mask = types == i
        m, s = _mean_se(su[mask])
        su_mean.append(m)
        su_se.append(s)
        m, s = _mean_se(success[mask].astype(float))
        rate.append(m)
        rate_se.append(s)
        draws.append(int(mask.sum()))
    clamp_events = int(np.sum(out_of_range[types]))
    return SimStats(
        trials=trials,
        mean_pu_payoff=mean_pu,
        pu_payoff_stderr=se_pu,
        mean_su_payoff_by_type=tuple(su_mean),
        su_payoff_stderr_by_type=tuple(su_se),
        success_rate_by_type=tuple(rate),
        success_rate_stderr_by_type=tuple(rate_se),
        draws_by_type=tuple(draws),
        chosen_contract_by_type=tuple(choice),
        clamp_events=clamp_events,
        warnings=tuple(warnings),
    )

"""Brute-force verification of closed-form menus on small instances.

The oracle enumerates contracts ``(t, r)`` on a rectangular grid for every
type, keeps menus that satisfy all IR and pairwise IC constraints at a loose
tolerance, and returns the feasible menu with the highest expected PU payoff.
It then zooms in around the incumbent for a few refinement rounds. Payoffs are
evaluated from the primitive effort/payoff formulas, not from the solvers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from contract_forge.contracts import check_constraints, solve
from contract_forge.model import (
    TOL,
    ContractMenu,
    MarketParams,
    ScenarioKind,
    SolveReport,
    TypeProfile,
    default_fixed_effort,
)

__all__ = [
    "FEASIBILITY_TOL",
    "MAX_TYPES",
    "GridSpec",
    "OracleVerdict",
    "SlackRow",
    "BindingAudit",
    "default_t_max",
    "grid_search",
    "verify_binding_pattern",
]

# Looser than the solver tolerance so grid quantization does not cut feasible menus.
FEASIBILITY_TOL = 1e-6
MAX_TYPES = 3
_BLOCK_ELEMS = 1 << 22


@dataclass(frozen=True)
class GridSpec:
    """Search grid: steps per axis, half-range of the down-payment axis, refinement passes.

    ``t_max=None`` selects :func:`default_t_max`.
    """

    r_steps: int = 200
    t_steps: int = 200
    t_max: Optional[float] = None
    refine_rounds: int = 3

    def __post_init__(self) -> None:
        if self.r_steps < 2 or self.t_steps < 2:
            raise ValueError("grid needs at least 2 steps per axis")
        if self.t_max is not None and not self.t_max > 0.0:
            raise ValueError("t_max must be positive")
        if self.refine_rounds < 0:
            raise ValueError("refine_rounds must be nonnegative")


@dataclass(frozen=True)
class OracleVerdict:
    """Outcome of a grid search.

    ``best_menu`` is ``None`` and ``best_payoff`` is NaN when no grid menu is
    feasible. ``round_payoffs`` holds the incumbent payoff after the coarse
    pass and after each refinement round.
    """

    regime: ScenarioKind
    best_menu: Optional[ContractMenu]
    best_payoff: float
    closed_form_payoff: float
    gap: float
    feasible: bool
    grid: GridSpec
    t_max: float
    round_payoffs: tuple[float, ...] = field(default=())


def default_t_max(profile: TypeProfile, params: MarketParams) -> float:
    """1.5 times the largest first-best surplus ``theta^2 R^2 / (2c)``; 1.0 if that is zero."""
    top = max(th * th for th in profile.thetas) * params.revenue**2 / (2.0 * params.cost)
    return 1.5 * top if top > 0.0 else 1.0


class _Problem:
    """Vectorized payoffs of one instance under one regime."""

    def __init__(self, profile, params, regime):
        self.thetas = np.asarray(profile.thetas)
        self.betas = np.asarray(profile.betas)
        self.R = params.revenue
        self.c = params.cost
        self.regime = regime
        self.e_fixed = default_fixed_effort(profile, params)

    def effort(self, theta, r):
        if self.regime is ScenarioKind.MORAL_HAZARD_ONLY:
            return np.full_like(r, self.e_fixed)
        return theta * (self.R - r) / self.c

    def su(self, theta, r, t):
        e = self.effort(theta, r)
        return theta * e * (self.R - r) - t - 0.5 * self.c * e * e

    def pu(self, theta, r, t):
        return t + theta * self.effort(theta, r) * r


def _axis(lo, hi, steps, keep=None):
    pts = np.linspace(lo, hi, steps)
    if keep is not None:
        pts = np.append(pts, keep)
    return np.unique(pts)


def _candidates(r_axis, t_axis):
    rr, tt = np.meshgrid(r_axis, t_axis, indexing="ij")
    # r-major flattening: index order equals lexicographic (r, t) order
    return rr.ravel(), tt.ravel()


class _Incumbent:
    def __init__(self):
        self.value = -math.inf
        self.key: Optional[tuple] = None

    def offer(self, value, keys):
        """``keys``: callable returning the menu keys of every tied position."""
        if value < self.value:
            return
        best = min(keys())
        if value > self.value or self.key is None or best < self.key:
            self.value = value
            self.key = best


def _menu_key(rs, ts):
    return tuple(float(x) for x in rs) + tuple(float(x) for x in ts)


def _search(problem, cands, tol):
    """Exhaustive search over the product of per-type candidate sets."""
    n = len(cands)
    th, beta = problem.thetas, problem.betas
    # own[i]: type i's payoff on its candidates; cross[i][j]: type i on type j's candidates
    own = [problem.su(th[i], *cands[i]) for i in range(n)]
    cross = [[problem.su(th[i], *cands[j]) if j != i else own[i] for j in range(n)] for i in range(n)]
    pu = [beta[i] * problem.pu(th[i], *cands[i]) for i in range(n)]
    alive = [np.flatnonzero(own[i] >= -tol) for i in range(n)]
    inc = _Incumbent()
    if any(a.size == 0 for a in alive):
        return inc

    def key_of(choice):
        rs = [cands[i][0][k] for i, k in enumerate(choice)]
        ts = [cands[i][1][k] for i, k in enumerate(choice)]
        return _menu_key(rs, ts)

    if n == 1:
        vals = pu[0][alive[0]]
        vmax = vals.max()
        inc.offer(vmax, lambda: [key_of((k,)) for k in alive[0][vals == vmax]])
        return inc

    def pair_search(prefix, base, idx_a, idx_b):
        a, b = n - 2, n - 1
        if idx_a.size == 0 or idx_b.size == 0:
            return
        own_b = own[b][idx_b]
        a_on_b = cross[a][b][idx_b]
        pu_b = pu[b][idx_b]
        rows = max(1, _BLOCK_ELEMS // idx_b.size)
        for start in range(0, idx_a.size, rows):
            ka = idx_a[start:start + rows]
            ok = (own[a][ka][:, None] >= a_on_b[None, :] - tol) & (
                own_b[None, :] >= cross[b][a][ka][:, None] - tol
            )
            if not ok.any():
                continue
            vals = np.where(ok, pu[a][ka][:, None] + pu_b[None, :], -np.inf)
            vmax = vals.max()
            total = base + vmax
            if total < inc.value:
                continue

            def keys(ka=ka, vals=vals, vmax=vmax):
                ia, ib = np.nonzero(vals == vmax)
                return [key_of(prefix + (ka[x], idx_b[y])) for x, y in zip(ia, ib)]

            inc.offer(total, keys)

    def recurse(prefix, base, masks):
        depth = len(prefix)
        if depth == n - 2:
            pair_search(prefix, base, masks[0], masks[1])
            return
        for k in masks[0]:
            nxt = []
            for off, idx in enumerate(masks[1:], start=depth + 1):
                keep = (own[depth][k] >= cross[depth][off][idx] - tol) & (
                    own[off][idx] >= cross[off][depth][k] - tol
                )
                nxt.append(idx[keep])
            recurse(prefix + (k,), base + pu[depth][k], nxt)

    recurse((), 0.0, alive)
    return inc


def _search_separable(problem, cands, tol):
    """Per-type search used when incentive constraints are absent."""
    inc = _Incumbent()
    rs, ts, value = [], [], 0.0
    for i, (r, t) in enumerate(cands):
        ok = problem.su(problem.thetas[i], r, t) >= -tol
        if not ok.any():
            return inc
        vals = np.where(ok, problem.pu(problem.thetas[i], r, t), -np.inf)
        vmax = vals.max()
        ties = np.flatnonzero(vals == vmax)
        k = min(ties, key=lambda j: (r[j], t[j]))
        rs.append(r[k])
        ts.append(t[k])
        value += problem.betas[i] * vmax
    inc.value = value
    inc.key = _menu_key(rs, ts)
    return inc


def grid_search(
    profile: TypeProfile,
    params: MarketParams,
    spec: GridSpec = GridSpec(),
    regime: ScenarioKind = ScenarioKind.JOINT,
) -> OracleVerdict:
    """Maximize expected PU payoff over grid menus satisfying IR and IC.

    Installments range over ``[0, R]`` and down payments over
    ``[-t_max, t_max]``. After the coarse pass, each refinement round
    re-grids every type's axes around its incumbent contract with a
    half-width ten times smaller than the previous round. Ties are broken
    toward the lexicographically smallest ``(r_1..r_n, t_1..t_n)``.

    Under ``ADVERSE_SELECTION_ONLY`` only IR constraints apply and each type
    is searched separately.
    """
    regime = ScenarioKind.parse(regime)
    n = profile.n
    if n > MAX_TYPES:
        raise ValueError(f"grid search supports at most {MAX_TYPES} types (got {n})")
    R = params.revenue
    t_max = spec.t_max if spec.t_max is not None else default_t_max(profile, params)
    problem = _Problem(profile, params, regime)
    search = _search_separable if regime is ScenarioKind.ADVERSE_SELECTION_ONLY else _search
    closed = solve(profile, params, regime).pu_payoff

    base = _candidates(_axis(0.0, R, spec.r_steps), _axis(-t_max, t_max, spec.t_steps, keep=0.0))
    inc = search(problem, [base] * n, FEASIBILITY_TOL)
    if inc.key is None:
        return OracleVerdict(regime, None, math.nan, closed, math.nan, False, spec, t_max)
    history = [inc.value]

    hw_r, hw_t = R / 2.0, t_max
    for _ in range(spec.refine_rounds):
        hw_r, hw_t = hw_r / 10.0, hw_t / 10.0
        rs, ts = inc.key[:n], inc.key[n:]
        cands = [
            _candidates(
                _axis(max(0.0, r - hw_r), min(R, r + hw_r), spec.r_steps, keep=r),
                _axis(max(-t_max, t - hw_t), min(t_max, t + hw_t), spec.t_steps, keep=t),
            )
            for r, t in zip(rs, ts)
        ]
        nxt = search(problem, cands, FEASIBILITY_TOL)
        # incumbent survives every refinement grid, so the search cannot lose it
        inc = nxt
        history.append(inc.value)

    menu = ContractMenu.from_arrays(inc.key[n:], inc.key[:n])
    audit = check_constraints(menu, profile, params, regime, tol=FEASIBILITY_TOL)
    if not audit.feasible:
        raise RuntimeError("grid search produced a menu that fails the constraint audit")
    value = float(inc.value)
    return OracleVerdict(
        regime=regime,
        best_menu=menu,
        best_payoff=value,
        closed_form_payoff=closed,
        gap=value - closed,
        feasible=True,
        grid=spec,
        t_max=t_max,
        round_payoffs=tuple(float(v) for v in history),
    )


@dataclass(frozen=True)
class SlackRow:
    """One constraint of the binding audit; ``j`` is ``None`` for IR rows."""

    kind: str
    i: int
    j: Optional[int]
    slack: float
    expected_binding: bool


@dataclass(frozen=True)
class BindingAudit:
    holds: bool
    rows: tuple[SlackRow, ...]


def verify_binding_pattern(
    report: SolveReport,
    profile: TypeProfile,
    params: MarketParams,
    binding_tol: float = TOL,
    slack_floor: float = 1e-12,
) -> BindingAudit:
    """Check that exactly IR of the lowest type and the local downward ICs bind.

    Slacks are recomputed from ``report.menu``. The pattern holds when every
    expected-binding constraint has ``|slack| < binding_tol`` and every other
    constraint has ``slack > slack_floor``.
    """
    cr = check_constraints(report.menu, profile, params, ScenarioKind.JOINT)
    rows = []
    for i, s in enumerate(cr.ir_slack):
        rows.append(SlackRow("IR", i, None, s, i == 0))
    for i in range(profile.n):
        for j in range(profile.n):
            if i != j:
                rows.append(SlackRow("IC", i, j, cr.ic_slack[i][j], j == i - 1))
    holds = all(
        abs(row.slack) < binding_tol if row.expected_binding else row.slack > slack_floor
        for row in rows
    )
    return BindingAudit(holds, tuple(rows))

"""Closed-form optimal menus for the three information regimes.

The joint adverse-selection/moral-hazard menu binds the lowest type's
participation constraint and every local downward incentive constraint.
Installments follow from the tail masses ``mu_i = sum_{j >= i} beta_j``::

    r_n = 0
    r_i = mu_{i+1} (theta_{i+1}^2 - theta_i^2) R
          / [mu_{i+1} (theta_{i+1}^2 - theta_i^2) + beta_i theta_i^2]

and down payments are recovered forward from the binding constraints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from contract_forge.model import (
    TOL,
    Contract,
    ContractMenu,
    MarketParams,
    ScenarioKind,
    SolveReport,
    TypeProfile,
    default_fixed_effort,
    equilibrium_efforts,
    pu_expected_payoff,
    social_welfare,
    su_payoff,
)

__all__ = [
    "MultiplierLadder",
    "ConstraintReport",
    "multiplier_ladder",
    "solve_joint",
    "solve_adverse_only",
    "solve_moral_only",
    "solve",
    "check_constraints",
    "build_report",
    "regime_efforts",
]


@dataclass(frozen=True)
class MultiplierLadder:
    """Tail masses ``mu_i = beta_i + mu_{i+1}`` with ``mu_n = beta_n``."""

    mus: tuple[float, ...]


@dataclass(frozen=True)
class ConstraintReport:
    """Participation and incentive slacks of a menu.

    Indices are zero-based. ``ic_slack[i][j]`` is type ``i``'s payoff from its
    own contract minus its payoff from contract ``j``. ``ldic_slack[k]`` is
    ``ic_slack[k + 1][k]``. In the adverse-selection-only regime types are
    contracted separately, so incentive constraints are not part of the
    program: ``ldic_slack`` and ``global_ic_violations`` are empty there while
    ``ic_slack`` is still filled in for inspection.
    """

    regime: ScenarioKind
    ir_slack: tuple[float, ...]
    ldic_slack: tuple[float, ...]
    ic_slack: tuple[tuple[float, ...], ...]
    global_ic_violations: tuple[tuple[int, int, float], ...]
    tol: float = TOL

    @property
    def feasible(self) -> bool:
        return (
            all(s >= -self.tol for s in self.ir_slack)
            and all(s >= -self.tol for s in self.ldic_slack)
            and not self.global_ic_violations
        )


def multiplier_ladder(betas) -> MultiplierLadder:
    n = len(betas)
    mus = [0.0] * n
    mus[n - 1] = float(betas[n - 1])
    for i in range(n - 2, -1, -1):
        mus[i] = betas[i] + mus[i + 1]
    return MultiplierLadder(tuple(mus))


def _check_finite(params: MarketParams) -> None:
    if not (math.isfinite(params.revenue) and math.isfinite(params.cost)):
        raise ValueError("non-finite market parameters")


def regime_efforts(
    menu: ContractMenu, profile: TypeProfile, params: MarketParams, regime: ScenarioKind
) -> tuple[float, ...]:
    if regime is ScenarioKind.MORAL_HAZARD_ONLY:
        return (default_fixed_effort(profile, params),) * profile.n
    return equilibrium_efforts(menu, profile, params)


def _payoff_matrix(menu, profile, params, regime):
    """``u[i][j]``: payoff of type ``i`` taking contract ``j`` under the regime's effort rule."""
    R, c = params.revenue, params.cost
    if regime is ScenarioKind.MORAL_HAZARD_ONLY:
        e = default_fixed_effort(profile, params)
        fixed_cost = 0.5 * c * e * e
        return [
            [th * e * (R - k.installment) - k.down_payment - fixed_cost for k in menu]
            for th in profile.thetas
        ]
    rows = []
    for th in profile.thetas:
        row = []
        for k in menu:
            x = th * (R - k.installment)
            row.append(x * x / (2.0 * c) - k.down_payment)
        rows.append(row)
    return rows


def check_constraints(
    menu: ContractMenu,
    profile: TypeProfile,
    params: MarketParams,
    regime: ScenarioKind = ScenarioKind.JOINT,
    tol: float = TOL,
) -> ConstraintReport:
    """Audit every IR constraint and every pairwise IC constraint of ``menu``.

    Violations are listed as ``(i, j, magnitude)`` in ascending ``(i, j)``
    order, where ``magnitude`` is the (positive) amount by which type ``i``
    prefers contract ``j`` over its own.
    """
    if len(menu) != profile.n:
        raise ValueError(f"menu has {len(menu)} contracts but profile has {profile.n} types")
    for k in menu:
        k.check_installment(params)
    n = profile.n
    u = _payoff_matrix(menu, profile, params, regime)
    ir = tuple(u[i][i] for i in range(n))
    ic = tuple(tuple(u[i][i] - u[i][j] for j in range(n)) for i in range(n))
    if regime is ScenarioKind.ADVERSE_SELECTION_ONLY:
        ldic: tuple[float, ...] = ()
        violations: tuple[tuple[int, int, float], ...] = ()
    else:
        ldic = tuple(ic[k + 1][k] for k in range(n - 1))
        violations = tuple(
            (i, j, -ic[i][j])
            for i in range(n)
            for j in range(n)
            if i != j and ic[i][j] < -tol
        )
    return ConstraintReport(regime, ir, ldic, ic, violations, tol)


def build_report(
    regime: ScenarioKind, profile: TypeProfile, params: MarketParams, menu: ContractMenu
) -> SolveReport:
    """Evaluate payoffs, welfare and constraints of ``menu`` under ``regime``."""
    efforts = regime_efforts(menu, profile, params, regime)
    su = tuple(su_payoff(th, e, k, params) for th, e, k in zip(profile.thetas, efforts, menu))
    return SolveReport(
        regime=regime,
        profile=profile,
        params=params,
        menu=menu,
        efforts=efforts,
        pu_payoff=pu_expected_payoff(menu, profile, params, efforts),
        su_payoffs=su,
        welfare=social_welfare(menu, profile, params, efforts),
        constraints=check_constraints(menu, profile, params, regime),
    )


def joint_installments(profile: TypeProfile, revenue: float) -> list[float]:
    thetas, betas = profile.thetas, profile.betas
    n = profile.n
    mus = multiplier_ladder(betas).mus
    r = [0.0] * n
    for i in range(n - 1):
        spread = mus[i + 1] * (thetas[i + 1] ** 2 - thetas[i] ** 2)
        denom = spread + betas[i] * thetas[i] ** 2
        # zero mass on type i and above: installment is irrelevant, use cash
        r[i] = spread * revenue / denom if denom > 0.0 else 0.0
    return r


def solve_joint(profile: TypeProfile, params: MarketParams) -> SolveReport:
    """Optimal menu under joint adverse selection and moral hazard.

    Implements the closed form with ``r_n = 0``, ``t_1`` making the lowest
    type's participation constraint bind, and each later ``t_i`` making the
    downward constraint towards type ``i-1`` bind.

    Notes
    -----
    The closed form is the optimum of the relaxed program (IR_1 and LDIC
    only). It satisfies every pairwise IC constraint only when the resulting
    installments are nonincreasing in the type index; otherwise
    ``report.constraints.global_ic_violations`` lists the breaches.
    """
    _check_finite(params)
    R, c = params.revenue, params.cost
    thetas = profile.thetas
    r = joint_installments(profile, R)
    t = [0.0] * profile.n
    t[0] = (thetas[0] * (R - r[0])) ** 2 / (2.0 * c)
    for i in range(1, profile.n):
        own = (thetas[i] * (R - r[i])) ** 2 / (2.0 * c)
        mimic = (thetas[i] * (R - r[i - 1])) ** 2 / (2.0 * c)
        t[i] = own - mimic + t[i - 1]
    menu = ContractMenu(tuple(Contract(ti, ri) for ti, ri in zip(t, r)))
    return build_report(ScenarioKind.JOINT, profile, params, menu)


def solve_adverse_only(profile: TypeProfile, params: MarketParams) -> SolveReport:
    """Cash-only menu ``t_i = theta_i^2 R^2 / (2c)``, ``r_i = 0``; every SU is held to zero."""
    _check_finite(params)
    R, c = params.revenue, params.cost
    menu = ContractMenu(tuple(Contract(th * th * R * R / (2.0 * c), 0.0) for th in profile.thetas))
    return build_report(ScenarioKind.ADVERSE_SELECTION_ONLY, profile, params, menu)


def solve_moral_only(profile: TypeProfile, params: MarketParams) -> SolveReport:
    """Full-installment menu ``t = -c e^2 / 2``, ``r = R`` at the fixed effort ``e``.

    The fixed effort is ``params.fixed_effort`` or, when unset, the lowest
    type's first-best effort ``theta_1 R / c``.
    """
    _check_finite(params)
    e = default_fixed_effort(profile, params)
    k = Contract(-0.5 * params.cost * e * e, params.revenue)
    menu = ContractMenu((k,) * profile.n)
    return build_report(ScenarioKind.MORAL_HAZARD_ONLY, profile, params, menu)


_SOLVERS = {
    ScenarioKind.JOINT: solve_joint,
    ScenarioKind.ADVERSE_SELECTION_ONLY: solve_adverse_only,
    ScenarioKind.MORAL_HAZARD_ONLY: solve_moral_only,
}


def solve(profile: TypeProfile, params: MarketParams, regime: ScenarioKind) -> SolveReport:
    """Dispatch to the solver for ``regime``."""
    return _SOLVERS[ScenarioKind.parse(regime)](profile, params)

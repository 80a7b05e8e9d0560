"""Domain types and payoff primitives for the financing-contract market.

A primary user (PU) sells spectrum to secondary users (SUs) of ``n``
capability types. Each contract is a pair ``(t, r)``: a down payment ``t``
paid at signing and an installment ``r`` paid out of the revenue ``R`` only
when the SU's transmission succeeds. An SU of type ``theta`` exerting effort
``e`` succeeds with probability ``theta * e`` and bears cost ``c e^2 / 2``.

Solver formulas never clamp ``theta * e`` to ``[0, 1]``; only the Monte Carlo
simulator does.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np

if TYPE_CHECKING:
    from contract_forge.contracts import ConstraintReport

__all__ = [
    "TOL",
    "ScenarioKind",
    "TypeProfile",
    "MarketParams",
    "Contract",
    "ContractMenu",
    "SolveReport",
    "best_effort",
    "su_payoff",
    "reduced_payoff",
    "pu_expected_payoff",
    "social_welfare",
    "success_probability",
    "default_fixed_effort",
    "equilibrium_efforts",
]

# Absolute tolerance for equality invariants; all formulas are O(1) polynomials.
TOL = 1e-9
_MASS_TOL = 1e-12


class ScenarioKind(Enum):
    """Information regime the PU contracts under."""

    JOINT = "joint"
    ADVERSE_SELECTION_ONLY = "as"
    MORAL_HAZARD_ONLY = "mh"

    @classmethod
    def parse(cls, value: "str | ScenarioKind") -> "ScenarioKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {
            "joint": cls.JOINT,
            "as": cls.ADVERSE_SELECTION_ONLY,
            "adverse_selection_only": cls.ADVERSE_SELECTION_ONLY,
            "mh": cls.MORAL_HAZARD_ONLY,
            "moral_hazard_only": cls.MORAL_HAZARD_ONLY,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown regime {value!r}; expected joint, as or mh") from None


@dataclass(frozen=True)
class TypeProfile:
    """Discrete type ladder ``theta_1 < ... < theta_n`` with prior masses.

    Parameters
    ----------
    thetas : sequence of float
        Capability values, strictly increasing and positive.
    betas : sequence of float
        Prior probability of each type; must sum to one within 1e-12.
    """

    thetas: tuple[float, ...]
    betas: tuple[float, ...]

    def __post_init__(self) -> None:
        thetas = tuple(float(x) for x in self.thetas)
        betas = tuple(float(x) for x in self.betas)
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "betas", betas)
        if len(thetas) == 0:
            raise ValueError("profile must contain at least one type")
        if len(thetas) != len(betas):
            raise ValueError(
                f"thetas and betas differ in length ({len(thetas)} != {len(betas)})"
            )
        if not all(math.isfinite(x) for x in thetas + betas):
            raise ValueError("thetas and betas must be finite")
        if any(x <= 0.0 for x in thetas):
            raise ValueError("every theta must be positive")
        if any(b <= a for a, b in zip(thetas, thetas[1:])):
            raise ValueError("thetas must be strictly increasing")
        if any(b < 0.0 or b > 1.0 for b in betas):
            raise ValueError("every beta must lie in [0, 1]")
        if abs(math.fsum(betas) - 1.0) > _MASS_TOL:
            raise ValueError(f"betas must sum to 1 (got {math.fsum(betas)!r})")

    @property
    def n(self) -> int:
        return len(self.thetas)

    @classmethod
    def uniform(cls, thetas: Sequence[float]) -> "TypeProfile":
        """Profile with equal prior mass ``1/n`` on each type."""
        n = len(thetas)
        return cls(tuple(thetas), (1.0 / n,) * n)


@dataclass(frozen=True)
class MarketParams:
    """Revenue, effort-cost coefficient and the fixed effort of the MH-only regime.

    ``fixed_effort=None`` means "use :func:`default_fixed_effort`". A zero
    revenue is accepted so that degenerate no-surplus markets can be audited.
    """

    revenue: float
    cost: float
    fixed_effort: Optional[float] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "revenue", float(self.revenue))
        object.__setattr__(self, "cost", float(self.cost))
        if self.fixed_effort is not None:
            object.__setattr__(self, "fixed_effort", float(self.fixed_effort))
        if not (math.isfinite(self.revenue) and math.isfinite(self.cost)):
            raise ValueError("revenue and cost must be finite")
        if self.revenue < 0.0:
            raise ValueError("revenue must be nonnegative")
        if self.cost <= 0.0:
            raise ValueError("cost coefficient must be positive")
        if self.fixed_effort is not None:
            if not math.isfinite(self.fixed_effort) or self.fixed_effort < 0.0:
                raise ValueError("fixed_effort must be a finite nonnegative number")


@dataclass(frozen=True)
class Contract:
    """A financing contract: down payment ``t`` and installment ``r``.

    The down payment may be negative (the PU pays the SU upfront).
    """

    down_payment: float
    installment: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "down_payment", float(self.down_payment))
        object.__setattr__(self, "installment", float(self.installment))
        if not (math.isfinite(self.down_payment) and math.isfinite(self.installment)):
            raise ValueError("contract terms must be finite")
        if self.installment < 0.0:
            raise ValueError("installment must be nonnegative")

    def check_installment(self, params: MarketParams) -> None:
        if self.installment > params.revenue:
            raise ValueError(
                f"installment {self.installment!r} exceeds revenue {params.revenue!r}"
            )


@dataclass(frozen=True)
class ContractMenu:
    """One contract per type index."""

    contracts: tuple[Contract, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "contracts", tuple(self.contracts))
        if len(self.contracts) == 0:
            raise ValueError("menu must contain at least one contract")

    def __len__(self) -> int:
        return len(self.contracts)

    def __getitem__(self, i: int) -> Contract:
        return self.contracts[i]

    def __iter__(self):
        return iter(self.contracts)

    @property
    def down_payments(self) -> np.ndarray:
        return np.array([c.down_payment for c in self.contracts])

    @property
    def installments(self) -> np.ndarray:
        return np.array([c.installment for c in self.contracts])

    @classmethod
    def from_arrays(cls, down_payments: Sequence[float], installments: Sequence[float]) -> "ContractMenu":
        if len(down_payments) != len(installments):
            raise ValueError("down_payments and installments differ in length")
        return cls(tuple(Contract(float(t), float(r)) for t, r in zip(down_payments, installments)))


@dataclass(frozen=True)
class SolveReport:
    """Solved menu together with efforts, payoffs and constraint diagnostics.

    Attributes
    ----------
    regime : ScenarioKind
    profile, params :
        Inputs the menu was solved for.
    menu : ContractMenu
    efforts : tuple of float
        Effort of each type under its own contract (best response, or the
        fixed effort in the moral-hazard-only regime).
    pu_payoff : float
        Expected PU payoff ``sum_i beta_i (t_i + theta_i e_i r_i)``.
    su_payoffs : tuple of float
        Expected payoff of each SU type under its own contract.
    welfare : float
        ``sum_i beta_i (theta_i e_i R - c e_i^2 / 2)``.
    constraints : ConstraintReport
        IR/IC slacks of the menu.
    bin_edges : tuple of float, optional
        Type-space bin edges when the profile came from a discretized
        continuous distribution.
    """

    regime: ScenarioKind
    profile: TypeProfile
    params: MarketParams
    menu: ContractMenu
    efforts: tuple[float, ...]
    pu_payoff: float
    su_payoffs: tuple[float, ...]
    welfare: float
    constraints: "ConstraintReport"
    bin_edges: Optional[tuple[float, ...]] = field(default=None)

    @property
    def expected_su_payoff(self) -> float:
        return math.fsum(b * u for b, u in zip(self.profile.betas, self.su_payoffs))


def _check_lengths(menu: ContractMenu, profile: TypeProfile) -> None:
    if len(menu) != profile.n:
        raise ValueError(f"menu has {len(menu)} contracts but profile has {profile.n} types")


def best_effort(theta: float, installment: float, params: MarketParams) -> float:
    """SU's payoff-maximizing effort ``theta (R - r) / c``.

    Independent of the down payment. Raises ``ValueError`` when the
    installment exceeds the revenue (negative margin).
    """
    if theta <= 0.0:
        raise ValueError("theta must be positive")
    if installment < 0.0 or installment > params.revenue:
        raise ValueError(
            f"installment {installment!r} outside [0, revenue={params.revenue!r}]"
        )
    return theta * (params.revenue - installment) / params.cost


def su_payoff(theta: float, effort: float, contract: Contract, params: MarketParams) -> float:
    """Expected SU payoff ``theta e (R - r) - t - c e^2 / 2`` (no clamping)."""
    if effort < 0.0:
        raise ValueError("effort must be nonnegative")
    margin = params.revenue - contract.installment
    return theta * effort * margin - contract.down_payment - 0.5 * params.cost * effort**2


def reduced_payoff(theta: float, contract: Contract, params: MarketParams) -> float:
    """SU payoff at its best-response effort: ``[theta (R - r)]^2 / (2c) - t``."""
    x = theta * (params.revenue - contract.installment)
    return x * x / (2.0 * params.cost) - contract.down_payment


def default_fixed_effort(profile: TypeProfile, params: MarketParams) -> float:
    """Effort fixed in the MH-only regime: ``params.fixed_effort`` or ``theta_1 R / c``."""
    if params.fixed_effort is not None:
        return params.fixed_effort
    return profile.thetas[0] * params.revenue / params.cost


def equilibrium_efforts(
    menu: ContractMenu, profile: TypeProfile, params: MarketParams
) -> tuple[float, ...]:
    """Best-response effort of each type under its own contract."""
    _check_lengths(menu, profile)
    return tuple(best_effort(th, c.installment, params) for th, c in zip(profile.thetas, menu))


def _resolve_efforts(menu, profile, params, efforts):
    if efforts is None:
        return equilibrium_efforts(menu, profile, params)
    efforts = tuple(float(e) for e in efforts)
    if len(efforts) != profile.n:
        raise ValueError("efforts and profile differ in length")
    return efforts


def pu_expected_payoff(
    menu: ContractMenu,
    profile: TypeProfile,
    params: MarketParams,
    efforts: Optional[Sequence[float]] = None,
) -> float:
    """Expected PU payoff ``sum_i beta_i (t_i + theta_i e_i r_i)``.

    ``efforts`` defaults to each type's best response; pass the fixed effort
    vector to evaluate a moral-hazard-only menu.
    """
    _check_lengths(menu, profile)
    efforts = _resolve_efforts(menu, profile, params, efforts)
    return math.fsum(
        b * (c.down_payment + th * e * c.installment)
        for b, th, e, c in zip(profile.betas, profile.thetas, efforts, menu)
    )


def social_welfare(
    menu: ContractMenu,
    profile: TypeProfile,
    params: MarketParams,
    efforts: Optional[Sequence[float]] = None,
) -> float:
    """Expected surplus ``sum_i beta_i (theta_i e_i R - c e_i^2 / 2)``; payments cancel."""
    _check_lengths(menu, profile)
    efforts = _resolve_efforts(menu, profile, params, efforts)
    return math.fsum(
        b * (th * e * params.revenue - 0.5 * params.cost * e * e)
        for b, th, e in zip(profile.betas, profile.thetas, efforts)
    )


def success_probability(theta: float, effort: float, clamp: bool = False) -> float:
    """Transmission success probability ``theta * effort``, optionally clamped to [0, 1]."""
    if theta <= 0.0:
        raise ValueError("theta must be positive")
    if effort < 0.0:
        raise ValueError("effort must be nonnegative")
    p = theta * effort
    if clamp:
        return min(max(p, 0.0), 1.0)
    return p

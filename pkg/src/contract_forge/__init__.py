"""Financing-contract design for spectrum trading under adverse selection and moral hazard."""

from contract_forge.contracts import (
    ConstraintReport,
    MultiplierLadder,
    check_constraints,
    multiplier_ladder,
    solve,
    solve_adverse_only,
    solve_joint,
    solve_moral_only,
)
from contract_forge.continuous import TypeDistribution, discretize, solve_continuous
from contract_forge.market_sim import (
    LinkParams,
    SimConfig,
    SimStats,
    data_rate,
    run_simulation,
    select_contract,
)
from contract_forge.model import (
    Contract,
    ContractMenu,
    MarketParams,
    ScenarioKind,
    SolveReport,
    TypeProfile,
    best_effort,
    pu_expected_payoff,
    social_welfare,
    su_payoff,
    success_probability,
)
from contract_forge.oracle import GridSpec, OracleVerdict, grid_search, verify_binding_pattern

__version__ = "0.1.0"

from __future__ import annotations

import math

import numpy as np
import pytest

from conftest import random_instances
from contract_forge.contracts import solve_joint, solve_moral_only
from contract_forge.market_sim import (
    THREADS_ENV,
    LinkParams,
    SimConfig,
    data_rate,
    run_simulation,
    select_contract,
)
from contract_forge.model import (
    Contract,
    ContractMenu,
    MarketParams,
    ScenarioKind,
    TypeProfile,
    best_effort,
    pu_expected_payoff,
)

SINGLE = TypeProfile((1.0,), (1.0,))
SINGLE_PARAMS = MarketParams(1.0, 5.0)
# effort 0.1, success probability 0.1, expected PU payoff 0.02 + 0.1 * 0.5 = 0.07
SINGLE_MENU = ContractMenu((Contract(0.02, 0.5),))


class TestDataRate:
    def test_vanishing_power(self):
        link = LinkParams(1e6, 1e-300, 1.0, 2.0, 1.0, 1.0)
        assert data_rate(link) == pytest.approx(0.0, abs=1e-280)

    def test_unit_snr(self):
        assert data_rate(LinkParams(1.0, 1.0, 1.0, 3.0, 1.0, 1.0)) == 1.0

    def test_arithmetic(self):
        # 6 * 1^2 / (2 * 1) = 3, log2(4) = 2
        assert data_rate(LinkParams(1.0, 6.0, 1.0, 2.0, 2.0, 1.0)) == 2.0

    def test_gain_exponent_applies_to_gain(self):
        assert data_rate(LinkParams(2.0, 1.0, 3.0, 1.0, 1.0, 1.0)) == pytest.approx(4.0)

    @pytest.mark.parametrize("field", range(6))
    def test_invalid(self, field):
        vals = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0]
        vals[field] = -1.0
        with pytest.raises(ValueError):
            LinkParams(*vals)


class TestSelectContract:
    def test_single_contract(self):
        assert select_contract(3.0, SINGLE_MENU, SINGLE_PARAMS) == 0

    def test_identical_contracts_go_to_true_type(self):
        menu = ContractMenu((Contract(0.1, 0.2),) * 3)
        assert select_contract(1.0, menu, SINGLE_PARAMS, true_index=2) == 2
        assert select_contract(1.0, menu, SINGLE_PARAMS) == 0

    def test_strict_preference_overrides_true_index(self):
        menu = ContractMenu((Contract(0.0, 0.0), Contract(0.5, 0.0)))
        assert select_contract(1.0, menu, SINGLE_PARAMS, true_index=1) == 0

    def test_ten_type_profile_self_selection(self, fig_profile):
        profile, params = fig_profile
        menu = solve_joint(profile, params).menu
        for i, th in enumerate(profile.thetas):
            assert select_contract(th, menu, params, true_index=i) == i

    @pytest.mark.parametrize("profile, params", random_instances(60, seed=11))
    def test_self_selection_on_monotone_menus(self, profile, params):
        rep = solve_joint(profile, params)
        monotone = bool(np.all(np.diff(rep.menu.installments) <= 0.0))
        picks = [select_contract(th, rep.menu, params, true_index=i) for i, th in enumerate(profile.thetas)]
        assert (picks == list(range(profile.n))) == monotone


class TestRunSimulation:
    def test_matches_analytic_payoff(self):
        stats = run_simulation(SINGLE_MENU, SINGLE, SINGLE_PARAMS, SimConfig(100_000, seed=1))
        expected = pu_expected_payoff(SINGLE_MENU, SINGLE, SINGLE_PARAMS)
        assert expected == pytest.approx(0.07, abs=1e-15)
        assert abs(stats.mean_pu_payoff - expected) <= 3 * stats.pu_payoff_stderr
        assert stats.clamp_events == 0
        assert stats.warnings == ()

    def test_same_seed_identical(self):
        cfg = SimConfig(20_000, seed=99)
        assert run_simulation(SINGLE_MENU, SINGLE, SINGLE_PARAMS, cfg) == run_simulation(
            SINGLE_MENU, SINGLE, SINGLE_PARAMS, cfg
        )

    def test_different_seed_differs(self):
        a = run_simulation(SINGLE_MENU, SINGLE, SINGLE_PARAMS, SimConfig(20_000, seed=1))
        b = run_simulation(SINGLE_MENU, SINGLE, SINGLE_PARAMS, SimConfig(20_000, seed=2))
        assert a.mean_pu_payoff != b.mean_pu_payoff

    def test_worker_count_does_not_matter(self, monkeypatch, two_type):
        profile, params = two_type
        menu = solve_joint(profile, params).menu
        cfg = SimConfig(50_000, seed=5)
        monkeypatch.setenv(THREADS_ENV, "1")
        serial = run_simulation(menu, profile, params, cfg)
        monkeypatch.setenv(THREADS_ENV, "4")
        parallel = run_simulation(menu, profile, params, cfg)
        assert serial == parallel

    def test_success_rates_converge(self):
        profile = TypeProfile((0.5, 1.0, 2.0), (0.2, 0.3, 0.5))
        params = MarketParams(1.0, 5.0)
        rep = solve_joint(profile, params)
        stats = run_simulation(rep.menu, profile, params, SimConfig(200_000, seed=3))
        for i, th in enumerate(profile.thetas):
            p = min(th * rep.efforts[i], 1.0)
            assert p <= 1.0
            assert abs(stats.success_rate_by_type[i] - p) <= 3 * stats.success_rate_stderr_by_type[i]
            assert abs(stats.mean_su_payoff_by_type[i] - rep.su_payoffs[i]) <= 3 * stats.su_payoff_stderr_by_type[i]
            assert 0.0 <= stats.success_rate_by_type[i] <= 1.0
        assert sum(stats.draws_by_type) == 200_000
        assert stats.clamp_events == 0
        assert abs(stats.mean_pu_payoff - rep.pu_payoff) <= 3 * stats.pu_payoff_stderr

    def test_type_frequencies_follow_prior(self):
        profile = TypeProfile((0.5, 1.0, 2.0), (0.2, 0.3, 0.5))
        params = MarketParams(1.0, 5.0)
        stats = run_simulation(solve_joint(profile, params).menu, profile, params, SimConfig(100_000, seed=8))
        for beta, count in zip(profile.betas, stats.draws_by_type):
            se = math.sqrt(beta * (1 - beta) / 100_000)
            assert abs(count / 100_000 - beta) <= 4 * se

    def test_clamping_counts_and_warns(self, fig_profile):
        profile, params = fig_profile
        rep = solve_joint(profile, params)
        stats = run_simulation(rep.menu, profile, params, SimConfig(10_000, seed=4))
        assert stats.clamp_events > 0
        assert any("clamped" in w for w in stats.warnings)
        clamped = [i for i in range(10) if profile.thetas[i] * rep.efforts[i] > 1.0]
        assert stats.clamp_events == sum(stats.draws_by_type[i] for i in clamped)
        for i in clamped:
            assert stats.success_rate_by_type[i] == 1.0

    def test_clamp_off_refuses_out_of_range(self, fig_profile):
        profile, params = fig_profile
        menu = solve_joint(profile, params).menu
        with pytest.raises(ValueError, match="outside"):
            run_simulation(menu, profile, params, SimConfig(10, seed=0, clamp_probability=False))

    def test_full_installment_zero_effort(self, two_type):
        profile, _ = two_type
        params = MarketParams(1.0, 5.0, fixed_effort=0.0)
        menu = ContractMenu((Contract(0.0, 1.0),) * 2)
        stats = run_simulation(menu, profile, params, SimConfig(5_000, seed=2, regime=ScenarioKind.MORAL_HAZARD_ONLY))
        assert stats.mean_su_payoff_by_type == (0.0, 0.0)
        assert stats.su_payoff_stderr_by_type == (0.0, 0.0)
        assert stats.mean_pu_payoff == 0.0

    def test_moral_only_uses_fixed_effort(self, two_type):
        profile, params = two_type
        rep = solve_moral_only(profile, params)
        stats = run_simulation(rep.menu, profile, params, SimConfig(100_000, seed=6, regime=ScenarioKind.MORAL_HAZARD_ONLY))
        for i, th in enumerate(profile.thetas):
            p = th * 0.2
            assert abs(stats.success_rate_by_type[i] - p) <= 3 * stats.success_rate_stderr_by_type[i]
        assert abs(stats.mean_pu_payoff - rep.pu_payoff) <= 3 * stats.pu_payoff_stderr

    def test_single_trial_has_no_stderr(self):
        stats = run_simulation(SINGLE_MENU, SINGLE, SINGLE_PARAMS, SimConfig(1, seed=0))
        assert stats.pu_payoff_stderr is None
        assert stats.su_payoff_stderr_by_type == (None,)

    def test_infeasible_menu_warns(self, two_type):
        profile, params = two_type
        menu = ContractMenu((Contract(1.0, 0.0), Contract(1.0, 0.0)))
        stats = run_simulation(menu, profile, params, SimConfig(100, seed=0))
        assert any("violates" in w for w in stats.warnings)

    @pytest.mark.parametrize("kwargs", [{"trials": 0}, {"trials": 10, "seed": -1}, {"trials": 10, "seed": 2**64}])
    def test_invalid_config(self, kwargs):
        with pytest.raises(ValueError):
            SimConfig(**kwargs)

    def test_length_mismatch(self, two_type):
        with pytest.raises(ValueError):
            run_simulation(SINGLE_MENU, *two_type, SimConfig(10))


def test_effort_in_simulation_matches_best_response(two_type):
    profile, params = two_type
    rep = solve_joint(profile, params)
    for th, k, e in zip(profile.thetas, rep.menu, rep.efforts):
        assert best_effort(th, k.installment, params) == e

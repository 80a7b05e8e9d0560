from __future__ import annotations

import csv
import io

import numpy as np
import pytest

from conftest import GOLDEN
from contract_forge.market_sim import THREADS_ENV
from contract_forge.model import MarketParams, ScenarioKind, TypeProfile
from contract_forge.sweep import (
    SweepSpec,
    SweepVariable,
    csv_header,
    default_report_types,
    rows_to_csv,
    run_sweep,
    sweep_spec_from_dict,
)


def by_scenario(rows):
    out = {}
    for row in rows:
        out.setdefault(row.report.regime, []).append(row)
    return out


def test_header_golden():
    for n in (2, 10):
        golden = (GOLDEN / f"sweep_header_n{n}.csv").read_text().strip().split(",")
        assert csv_header(n) == golden


def test_default_report_types():
    assert default_report_types(10) == (0, 4, 9)
    assert default_report_types(3) == (0, 1, 2)
    assert default_report_types(1) == (0, 0, 0)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(variable=SweepVariable.COST_C, start=2.0, stop=1.0, steps=5),
        dict(variable=SweepVariable.COST_C, start=1.0, stop=2.0, steps=1),
        dict(variable=SweepVariable.HIGH_TYPE_BETA, start=0.5, stop=1.5, steps=3),
        dict(variable=SweepVariable.COST_C, start=1.0, stop=2.0, steps=3, scenarios=()),
    ],
)
def test_spec_invariants(kwargs):
    with pytest.raises(ValueError):
        SweepSpec(**kwargs)


def test_beta_sweep_needs_two_types(fig_profile):
    spec = SweepSpec(SweepVariable.HIGH_TYPE_BETA, 0.05, 0.95, 5)
    with pytest.raises(ValueError, match="2 types"):
        run_sweep(TypeProfile.uniform([1.0, 2.0, 3.0]), MarketParams(0.5, 4.0), spec)


def test_cost_sweep_trends(fig_profile):
    profile, params = fig_profile
    rows = run_sweep(profile, params, SweepSpec(SweepVariable.COST_C, 1.0, 10.0, 19))
    groups = by_scenario(rows)
    assert set(groups) == set(ScenarioKind)
    for regime, rs in groups.items():
        pu = [r.report.pu_payoff for r in rs]
        assert np.all(np.diff(pu) < 0.0), regime
        welfare = [r.report.welfare for r in rs]
        assert np.all(np.diff(welfare) < 0.0), regime
        # installments never depend on c
        first = rs[0].report.menu.installments
        for r in rs:
            if regime is ScenarioKind.MORAL_HAZARD_ONLY:
                assert np.all(r.report.menu.installments == params.revenue)
            else:
                assert r.report.menu.installments.tobytes() == first.tobytes()


def test_revenue_sweep_trends(fig_profile):
    profile, _ = fig_profile
    rows = run_sweep(profile, MarketParams(0.5, 5.0), SweepSpec(SweepVariable.REVENUE_R, 0.1, 1.0, 10))
    for regime, rs in by_scenario(rows).items():
        assert np.all(np.diff([r.report.pu_payoff for r in rs]) > 0.0), regime


def test_beta_sweep_two_types():
    profile = TypeProfile((1.0, 2.0), (0.5, 0.5))
    params = MarketParams(0.5, 4.0)
    rows = run_sweep(profile, params, SweepSpec(SweepVariable.HIGH_TYPE_BETA, 0.05, 0.95, 19, (ScenarioKind.JOINT,)))
    assert [r.report.profile.betas[1] for r in rows] == pytest.approx(np.linspace(0.05, 0.95, 19))
    pu = [r.report.pu_payoff for r in rows]
    assert np.all(np.diff(pu) > 0.0)
    # more confidence in the high type raises the low type's installment
    assert np.all(np.diff([r.report.menu[0].installment for r in rows]) > 0.0)


def test_rows_sorted_and_thread_independent(monkeypatch, fig_profile):
    profile, params = fig_profile
    spec = SweepSpec(SweepVariable.COST_C, 1.0, 10.0, 7)
    monkeypatch.setenv(THREADS_ENV, "1")
    serial = rows_to_csv(run_sweep(profile, params, spec), profile.n)
    monkeypatch.setenv(THREADS_ENV, "8")
    parallel = rows_to_csv(run_sweep(profile, params, spec), profile.n)
    assert serial == parallel
    parsed = list(csv.DictReader(io.StringIO(serial)))
    keys = [(row["scenario"], float(row["value"])) for row in parsed]
    assert keys == sorted(keys)
    assert len(parsed) == 21


def test_csv_values_round_trip(two_type):
    profile, params = two_type
    rows = run_sweep(profile, params, SweepSpec(SweepVariable.COST_C, 5.0, 6.0, 2, (ScenarioKind.JOINT,)))
    parsed = list(csv.DictReader(io.StringIO(rows_to_csv(rows, 2))))
    first = parsed[0]
    assert float(first["pu_payoff"]) == rows[0].report.pu_payoff
    assert float(first["r_low"]) == 0.75 and float(first["r_high"]) == 0.0
    assert float(first["t_low"]) == rows[0].report.menu[0].down_payment


def test_spec_from_dict():
    spec = sweep_spec_from_dict({"variable": "revenue_r", "from": 0.1, "to": 1.0, "steps": 4,
                                 "scenarios": ["mh"], "report_types": [1, 2, 3]})
    assert spec.variable is SweepVariable.REVENUE_R
    assert spec.scenarios == (ScenarioKind.MORAL_HAZARD_ONLY,)
    assert spec.report_types == (0, 1, 2)

"""One-parameter sweeps across the three regimes, producing plot-ready rows.

Column order of the CSV output is fixed::

    variable, value, scenario, pu_payoff, su_payoff_expected, welfare,
    t_low, r_low, t_mid, r_mid, t_high, r_high, su_payoff_1, ..., su_payoff_n

``low/mid/high`` default to types ``1, ceil(n/2), n``. Rows are sorted by
scenario code, then by the swept value.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from contract_forge.contracts import solve
from contract_forge.market_sim import worker_count
from contract_forge.model import MarketParams, ScenarioKind, SolveReport, TypeProfile

__all__ = [
    "SweepVariable",
    "SweepSpec",
    "SweepRow",
    "default_report_types",
    "sweep_values",
    "run_sweep",
    "csv_header",
    "rows_to_csv",
    "sweep_spec_from_dict",
]

ALL_SCENARIOS = (
    ScenarioKind.JOINT,
    ScenarioKind.ADVERSE_SELECTION_ONLY,
    ScenarioKind.MORAL_HAZARD_ONLY,
)


class SweepVariable(Enum):
    COST_C = "cost_c"
    REVENUE_R = "revenue_r"
    HIGH_TYPE_BETA = "high_type_beta"


@dataclass(frozen=True)
class SweepSpec:
    """Swept variable, its inclusive range and the regimes to solve.

    ``report_types`` are zero-based indices of the low/mid/high types.
    ``HIGH_TYPE_BETA`` sweeps set ``betas = (1 - v, v)`` and need ``n == 2``.
    """

    variable: SweepVariable
    start: float
    stop: float
    steps: int
    scenarios: tuple[ScenarioKind, ...] = ALL_SCENARIOS
    report_types: Optional[tuple[int, int, int]] = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.start) and math.isfinite(self.stop)) or not self.start < self.stop:
            raise ValueError("sweep range needs from < to")
        if self.steps < 2:
            raise ValueError("sweep needs at least 2 steps")
        if not self.scenarios:
            raise ValueError("sweep needs at least one scenario")
        if self.variable is SweepVariable.HIGH_TYPE_BETA and not (0.0 <= self.start and self.stop <= 1.0):
            raise ValueError("high-type probability must stay within [0, 1]")

    def validate_for(self, profile: TypeProfile) -> None:
        if self.variable is SweepVariable.HIGH_TYPE_BETA and profile.n != 2:
            raise ValueError(f"high_type_beta sweeps need exactly 2 types (got {profile.n})")
        if self.report_types is not None and any(not 0 <= i < profile.n for i in self.report_types):
            raise ValueError("report_types out of range for the profile")


@dataclass(frozen=True)
class SweepRow:
    variable: SweepVariable
    value: float
    report: SolveReport
    report_types: tuple[int, int, int]


def default_report_types(n: int) -> tuple[int, int, int]:
    return 0, math.ceil(n / 2) - 1, n - 1


def sweep_values(spec: SweepSpec) -> np.ndarray:
    return np.linspace(spec.start, spec.stop, spec.steps)


def _point(variable, value, profile, params):
    if variable is SweepVariable.COST_C:
        return profile, replace(params, cost=value)
    if variable is SweepVariable.REVENUE_R:
        return profile, replace(params, revenue=value)
    return TypeProfile(profile.thetas, (1.0 - value, value)), params


def run_sweep(profile: TypeProfile, params: MarketParams, spec: SweepSpec) -> list[SweepRow]:
    """Solve every ``(scenario, value)`` grid point.

    The moral-hazard-only effort follows ``theta_1 R / c`` at each point
    unless ``params.fixed_effort`` pins it.
    """
    spec.validate_for(profile)
    report_types = spec.report_types or default_report_types(profile.n)
    jobs = [(s, float(v)) for s in spec.scenarios for v in sweep_values(spec)]

    def run(job):
        scenario, value = job
        prof, par = _point(spec.variable, value, profile, params)
        return SweepRow(spec.variable, value, solve(prof, par, scenario), report_types)

    workers = min(worker_count(), len(jobs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run, jobs))
    else:
        rows = [run(j) for j in jobs]
    rows.sort(key=lambda row: (row.report.regime.value, row.value))
    return rows


def csv_header(n: int) -> list[str]:
    head = [
        "variable", "value", "scenario", "pu_payoff", "su_payoff_expected", "welfare",
        "t_low", "r_low", "t_mid", "r_mid", "t_high", "r_high",
    ]
    return head + [f"su_payoff_{i + 1}" for i in range(n)]


def rows_to_csv(rows: Sequence[SweepRow], n: int) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(csv_header(n))
    for row in rows:
        rep = row.report
        terms = []
        for i in row.report_types:
            terms += [repr(rep.menu[i].down_payment), repr(rep.menu[i].installment)]
        writer.writerow(
            [row.variable.value, repr(row.value), rep.regime.value, repr(rep.pu_payoff),
             repr(rep.expected_su_payoff), repr(rep.welfare)]
            + terms
            + [repr(u) for u in rep.su_payoffs]
        )
    return buf.getvalue()


def sweep_spec_from_dict(d: dict) -> SweepSpec:
    """Build a :class:`SweepSpec` from a config ``sweep`` section (1-based ``report_types``)."""
    scenarios = tuple(ScenarioKind.parse(s) for s in d.get("scenarios", [s.value for s in ALL_SCENARIOS]))
    report_types = d.get("report_types")
    return SweepSpec(
        variable=SweepVariable(d["variable"]),
        start=float(d["from"]),
        stop=float(d["to"]),
        steps=int(d["steps"]),
        scenarios=scenarios,
        report_types=tuple(i - 1 for i in report_types) if report_types else None,
    )

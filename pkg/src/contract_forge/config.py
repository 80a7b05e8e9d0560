"""JSON configuration documents and JSON serialization of results.

A configuration is one JSON object::

    {
      "profile": {"thetas": [1, 2], "betas": [0.5, 0.5]},
      "params": {"revenue": 1.0, "cost": 5.0, "fixed_effort": null},
      "regime": "joint",                        # or "as", "mh", or a list
      "sim": {"trials": 100000, "seed": 7, "clamp_probability": true,
              "menu": [{"down_payment": 0.02, "installment": 0.5}]},
      "sweep": {"variable": "cost_c", "from": 1, "to": 10, "steps": 19,
                "scenarios": ["joint", "as", "mh"]},
      "grid": {"r_steps": 200, "t_steps": 200, "refine_rounds": 3, "t_max": null}
    }

Only ``profile`` and ``params`` are always required. Validation errors carry
the dotted path of the offending field.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import jsonschema

from contract_forge.contracts import ConstraintReport, check_constraints
from contract_forge.market_sim import SimConfig, SimStats
from contract_forge.model import (
    Contract,
    ContractMenu,
    MarketParams,
    ScenarioKind,
    SolveReport,
    TypeProfile,
)
from contract_forge.oracle import BindingAudit, GridSpec, OracleVerdict

__all__ = [
    "CONFIG_SCHEMA",
    "ConfigError",
    "Config",
    "load_config",
    "parse_config",
    "report_to_dict",
    "report_from_dict",
    "load_solve_output",
    "verdict_to_dict",
    "stats_to_dict",
    "dumps",
]

_number = {"type": "number"}
_regime = {"type": "string", "enum": ["joint", "as", "mh"]}
_contract = {
    "type": "object",
    "required": ["down_payment", "installment"],
    "properties": {"down_payment": _number, "installment": _number},
    "additionalProperties": False,
}

CONFIG_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["profile", "params"],
    "properties": {
        "profile": {
            "type": "object",
            "required": ["thetas", "betas"],
            "properties": {
                "thetas": {"type": "array", "items": _number, "minItems": 1},
                "betas": {"type": "array", "items": _number, "minItems": 1},
            },
            "additionalProperties": False,
        },
        "params": {
            "type": "object",
            "required": ["revenue", "cost"],
            "properties": {
                "revenue": _number,
                "cost": _number,
                "fixed_effort": {"type": ["number", "null"]},
            },
            "additionalProperties": False,
        },
        "regime": {"oneOf": [_regime, {"type": "array", "items": _regime, "minItems": 1}]},
        "sim": {
            "type": "object",
            "required": ["trials"],
            "properties": {
                "trials": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
                "clamp_probability": {"type": "boolean"},
                "menu": {"type": "array", "items": _contract, "minItems": 1},
            },
            "additionalProperties": False,
        },
        "sweep": {
            "type": "object",
            "required": ["variable", "from", "to", "steps"],
            "properties": {
                "variable": {"type": "string", "enum": ["cost_c", "revenue_r", "high_type_beta"]},
                "from": _number,
                "to": _number,
                "steps": {"type": "integer"},
                "scenarios": {"type": "array", "items": _regime, "minItems": 1},
                "report_types": {
                    "type": "array",
                    "items": {"type": "integer", "minimum": 1},
                    "minItems": 3,
                    "maxItems": 3,
                },
            },
            "additionalProperties": False,
        },
        "grid": {
            "type": "object",
            "properties": {
                "r_steps": {"type": "integer"},
                "t_steps": {"type": "integer"},
                "refine_rounds": {"type": "integer"},
                "t_max": {"type": ["number", "null"]},
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}


class ConfigError(ValueError):
    """Invalid configuration; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


@dataclass(frozen=True)
class Config:
    profile: TypeProfile
    params: MarketParams
    regimes: tuple[ScenarioKind, ...]
    sim: Optional[SimConfig]
    sim_menu: Optional[ContractMenu]
    sweep: Optional[dict]
    grid: GridSpec


def _schema_error_path(err: jsonschema.ValidationError) -> str:
    parts = [str(p) for p in err.absolute_path]
    if err.validator == "required" and isinstance(err.instance, dict):
        missing = [p for p in err.validator_value if p not in err.instance]
        if missing:
            parts.append(missing[0])
    return ".".join(parts)


def _build(path, factory, *args, **kwargs):
    try:
        return factory(*args, **kwargs)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None


def parse_config(doc: Any) -> Config:
    """Validate a decoded JSON document and build the domain objects."""
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: (list(e.absolute_path), e.message))
    if errors:
        err = errors[0]
        raise ConfigError(_schema_error_path(err), err.message)

    for key in ("thetas", "betas"):
        if not all(math.isfinite(x) for x in doc["profile"][key]):
            raise ConfigError(f"profile.{key}", "values must be finite")
    profile = _build("profile", TypeProfile, tuple(doc["profile"]["thetas"]), tuple(doc["profile"]["betas"]))
    p = doc["params"]
    params = _build("params", MarketParams, p["revenue"], p["cost"], p.get("fixed_effort"))

    raw = doc.get("regime", "joint")
    regimes = tuple(ScenarioKind.parse(x) for x in ([raw] if isinstance(raw, str) else raw))

    sim = sim_menu = None
    if "sim" in doc:
        s = doc["sim"]
        sim = _build("sim", SimConfig, s["trials"], s.get("seed", 0), s.get("clamp_probability", True), regimes[0])
        if "menu" in s:
            sim_menu = _build(
                "sim.menu",
                lambda: ContractMenu(tuple(Contract(k["down_payment"], k["installment"]) for k in s["menu"])),
            )
            if len(sim_menu) != profile.n:
                raise ConfigError("sim.menu", f"expected {profile.n} contracts, got {len(sim_menu)}")

    g = doc.get("grid", {})
    grid = _build(
        "grid",
        GridSpec,
        g.get("r_steps", 200),
        g.get("t_steps", 200),
        g.get("t_max"),
        g.get("refine_rounds", 3),
    )
    return Config(profile, params, regimes, sim, sim_menu, doc.get("sweep"), grid)


def load_config(path) -> Config:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError("", f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"malformed JSON: {exc}") from None
    return parse_config(doc)


def _float(x):
    # JSON has no NaN/inf; map them to null
    if x is None or not math.isfinite(x):
        return None
    return float(x)


def _constraints_to_dict(cr: ConstraintReport) -> dict:
    return {
        "feasible": cr.feasible,
        "tol": cr.tol,
        "ir_slack": [_float(s) for s in cr.ir_slack],
        "ldic_slack": [_float(s) for s in cr.ldic_slack],
        "ic_slack": [[_float(s) for s in row] for row in cr.ic_slack],
        "global_ic_violations": [
            {"i": i, "j": j, "magnitude": _float(m)} for i, j, m in cr.global_ic_violations
        ],
    }


def _menu_to_list(menu: ContractMenu) -> list:
    return [{"down_payment": k.down_payment, "installment": k.installment} for k in menu]


def report_to_dict(report: SolveReport) -> dict:
    """JSON-ready view of a :class:`SolveReport`; type indices are zero-based."""
    flags = []
    if any(k.down_payment < 0.0 for k in report.menu):
        flags.append("negative_down_payment")
    out = {
        "regime": report.regime.value,
        "profile": {"thetas": list(report.profile.thetas), "betas": list(report.profile.betas)},
        "params": {
            "revenue": report.params.revenue,
            "cost": report.params.cost,
            "fixed_effort": report.params.fixed_effort,
        },
        "menu": _menu_to_list(report.menu),
        "efforts": list(report.efforts),
        "pu_payoff": report.pu_payoff,
        "su_payoffs": list(report.su_payoffs),
        "expected_su_payoff": report.expected_su_payoff,
        "welfare": report.welfare,
        "constraints": _constraints_to_dict(report.constraints),
        "flags": flags,
    }
    if report.bin_edges is not None:
        out["bin_edges"] = list(report.bin_edges)
    return out


def report_from_dict(d: dict) -> SolveReport:
    """Rebuild a report from :func:`report_to_dict` output, re-auditing its constraints."""
    from contract_forge.contracts import build_report

    profile = TypeProfile(tuple(d["profile"]["thetas"]), tuple(d["profile"]["betas"]))
    p = d["params"]
    params = MarketParams(p["revenue"], p["cost"], p.get("fixed_effort"))
    menu = ContractMenu(tuple(Contract(k["down_payment"], k["installment"]) for k in d["menu"]))
    report = build_report(ScenarioKind.parse(d["regime"]), profile, params, menu)
    if d.get("bin_edges") is not None:
        from dataclasses import replace

        report = replace(report, bin_edges=tuple(d["bin_edges"]))
    return report


def load_solve_output(path) -> list[SolveReport]:
    """Load the output of ``contract-forge solve``; constraints are recomputed on load."""
    doc = json.loads(Path(path).read_text())
    return [report_from_dict(d) for d in doc["reports"]]


def _audit_to_dict(audit: BindingAudit) -> dict:
    return {
        "holds": audit.holds,
        "rows": [
            {"kind": r.kind, "i": r.i, "j": r.j, "slack": _float(r.slack), "expected_binding": r.expected_binding}
            for r in audit.rows
        ],
    }


def verdict_to_dict(verdict: OracleVerdict, audit: Optional[BindingAudit] = None) -> dict:
    out = {
        "regime": verdict.regime.value,
        "grid": {
            "r_steps": verdict.grid.r_steps,
            "t_steps": verdict.grid.t_steps,
            "refine_rounds": verdict.grid.refine_rounds,
            "t_max": verdict.t_max,
        },
        "feasible": verdict.feasible,
        "best_menu": _menu_to_list(verdict.best_menu) if verdict.best_menu is not None else None,
        "best_payoff": _float(verdict.best_payoff),
        "closed_form_payoff": _float(verdict.closed_form_payoff),
        "gap": _float(verdict.gap),
        "round_payoffs": [_float(v) for v in verdict.round_payoffs],
    }
    if audit is not None:
        out["binding_audit"] = _audit_to_dict(audit)
    return out


def stats_to_dict(stats: SimStats, regime: ScenarioKind, seed: int) -> dict:
    def opt(xs):
        return [_float(x) for x in xs]

    return {
        "regime": regime.value,
        "seed": seed,
        "trials": stats.trials,
        "mean_pu_payoff": _float(stats.mean_pu_payoff),
        "pu_payoff_stderr": _float(stats.pu_payoff_stderr),
        "mean_su_payoff_by_type": opt(stats.mean_su_payoff_by_type),
        "su_payoff_stderr_by_type": opt(stats.su_payoff_stderr_by_type),
        "success_rate_by_type": opt(stats.success_rate_by_type),
        "success_rate_stderr_by_type": opt(stats.success_rate_stderr_by_type),
        "draws_by_type": list(stats.draws_by_type),
        "chosen_contract_by_type": list(stats.chosen_contract_by_type),
        "clamp_events": stats.clamp_events,
        "warnings": list(stats.warnings),
    }


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"

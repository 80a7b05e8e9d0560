"""Command-line front end: ``solve``, ``sweep``, ``verify`` and ``simulate``.

Exit codes: 0 success, 2 invalid configuration or arguments, 3 solver failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from contract_forge.config import (
    ConfigError,
    Config,
    dumps,
    load_config,
    report_to_dict,
    stats_to_dict,
    verdict_to_dict,
)
from contract_forge.contracts import solve, solve_joint
from contract_forge.market_sim import SimConfig, run_simulation
from contract_forge.model import ScenarioKind
from contract_forge.oracle import MAX_TYPES, GridSpec, grid_search, verify_binding_pattern
from contract_forge.sweep import rows_to_csv, run_sweep, sweep_spec_from_dict

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_SOLVER = 3

logger = logging.getLogger("contract_forge")


class _Invalid(Exception):
    pass


def _write(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, newline="\n")


def _regimes(cfg: Config, override: Optional[str]) -> tuple[ScenarioKind, ...]:
    if override is None:
        return cfg.regimes
    return (ScenarioKind.parse(override),)


def _parse_grid(text: str, base: GridSpec) -> GridSpec:
    try:
        r_steps, t_steps, refine = (int(x) for x in text.split(","))
    except ValueError:
        raise _Invalid("--grid expects r_steps,t_steps,refine_rounds") from None
    try:
        return GridSpec(r_steps, t_steps, base.t_max, refine)
    except ValueError as exc:
        raise _Invalid(f"--grid: {exc}") from None


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    reports = [solve(cfg.profile, cfg.params, r) for r in _regimes(cfg, args.regime)]
    _write(dumps({"reports": [report_to_dict(r) for r in reports]}), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if cfg.sweep is None:
        raise ConfigError("sweep", "sweep section is required")
    try:
        spec = sweep_spec_from_dict(cfg.sweep)
        if args.regime is not None:
            spec = type(spec)(spec.variable, spec.start, spec.stop, spec.steps,
                              (ScenarioKind.parse(args.regime),), spec.report_types)
        spec.validate_for(cfg.profile)
    except ValueError as exc:
        raise ConfigError("sweep", str(exc)) from None
    rows = run_sweep(cfg.profile, cfg.params, spec)
    _write(rows_to_csv(rows, cfg.profile.n), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = load_config(args.config)
    if cfg.profile.n > MAX_TYPES:
        raise ConfigError(
            "profile.thetas",
            f"brute-force verification is limited to {MAX_TYPES} types (got {cfg.profile.n}); "
            "the search space grows exponentially in n",
        )
    grid = _parse_grid(args.grid, cfg.grid) if args.grid else cfg.grid
    regime = _regimes(cfg, args.regime)[0]
    verdict = grid_search(cfg.profile, cfg.params, grid, regime)
    audit = None
    if regime is ScenarioKind.JOINT:
        audit = verify_binding_pattern(solve_joint(cfg.profile, cfg.params), cfg.profile, cfg.params)
    _write(dumps(verdict_to_dict(verdict, audit)), args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    if cfg.sim is None:
        raise ConfigError("sim", "sim section is required")
    regime = _regimes(cfg, args.regime)[0]
    seed = cfg.sim.seed if args.seed is None else args.seed
    try:
        sim = SimConfig(cfg.sim.trials, seed, cfg.sim.clamp_probability, regime)
    except ValueError as exc:
        raise _Invalid(f"--seed: {exc}") from None
    menu = cfg.sim_menu if cfg.sim_menu is not None else solve(cfg.profile, cfg.params, regime).menu
    stats = run_simulation(menu, cfg.profile, cfg.params, sim)
    _write(dumps(stats_to_dict(stats, regime, seed)), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contract-forge",
        description="Optimal financing-contract menus for spectrum trading.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="JSON configuration file")
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument("--regime", choices=["joint", "as", "mh"], default=None,
                       help="override the configured regime")

    p = sub.add_parser("solve", help="solve the configured regime(s) and write JSON reports")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="sweep c, R or the high-type probability; write CSV")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="brute-force grid audit of the closed-form menu (n <= 3)")
    common(p)
    p.add_argument("--grid", default=None, metavar="R_STEPS,T_STEPS,REFINE",
                   help="grid resolution, e.g. 200,200,3")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="Monte Carlo contract execution; write JSON stats")
    common(p)
    p.add_argument("--seed", type=int, default=None, help="override sim.seed (unsigned 64-bit)")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ConfigError, _Invalid) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, RuntimeError, ArithmeticError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())

"""Play the menu out as random transmissions and compare with expectations.

Each trial draws a type from the prior, lets that user pick the contract it
likes best, and flips a coin with success probability theta * effort.
Results do not depend on how many threads run the blocks.
"""

import os

from contract_forge import MarketParams, TypeProfile, solve_joint
from contract_forge.market_sim import THREADS_ENV, SimConfig, run_simulation

profile = TypeProfile((0.5, 1.0, 2.0), (0.2, 0.3, 0.5))
params = MarketParams(revenue=1.0, cost=5.0)
report = solve_joint(profile, params)

stats = run_simulation(report.menu, profile, params, SimConfig(trials=200_000, seed=7))
print(f"PU payoff: simulated {stats.mean_pu_payoff:.5f} +- {stats.pu_payoff_stderr:.5f}, "
      f"expected {report.pu_payoff:.5f}")
for i, th in enumerate(profile.thetas):
    print(f"  theta={th}: picked contract {stats.chosen_contract_by_type[i]}, "
          f"success rate {stats.success_rate_by_type[i]:.4f} "
          f"(expected {th * report.efforts[i]:.4f})")

os.environ[THREADS_ENV] = "1"
serial = run_simulation(report.menu, profile, params, SimConfig(trials=200_000, seed=7))
print(f"single-threaded rerun identical: {serial == stats}")

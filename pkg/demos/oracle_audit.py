"""Cross-check the closed-form menu against an exhaustive grid search.

The grid search knows nothing about multipliers or binding constraints. It
enumerates (t, r) pairs per type, keeps the menus that satisfy participation
and truth-telling, and zooms in around the best one. The payoff gap shrinks
as the grid gets finer.
"""

import time

from contract_forge import MarketParams, TypeProfile
from contract_forge.oracle import GridSpec, grid_search

profile = TypeProfile((1.0, 2.0), (0.5, 0.5))
params = MarketParams(revenue=1.0, cost=5.0)

start = time.perf_counter()
verdict = grid_search(profile, params, GridSpec(r_steps=80, t_steps=80, refine_rounds=3))
elapsed = time.perf_counter() - start

print(f"closed form payoff  {verdict.closed_form_payoff:.8f}")
for k, value in enumerate(verdict.round_payoffs):
    print(f"  round {k}          {value:.8f}")
print(f"gap                 {verdict.gap:+.2e}  ({elapsed:.1f}s)")
for th, k in zip(profile.thetas, verdict.best_menu):
    print(f"  theta={th}: t={k.down_payment:.5f} r={k.installment:.5f}")

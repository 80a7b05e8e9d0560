"""Approximate a continuum of types by equal-mass bins.

As the number of bins grows the installment schedule turns into a smooth
decreasing curve and the primary user's payoff settles down.
"""

import numpy as np

from contract_forge import MarketParams
from contract_forge.continuous import TypeDistribution, solve_continuous, step_function

dist = TypeDistribution.uniform(1.0, 10.0)
params = MarketParams(revenue=0.5, cost=5.0)
probe = np.array([1.5, 3.0, 5.0, 7.0, 9.5])

print(f"{'bins':>5} {'PU payoff':>10}   r at theta = {probe}")
for n in (5, 10, 20, 40, 80):
    report = solve_continuous(dist, params, n)
    _, r = step_function(report, probe)
    print(f"{n:5d} {report.pu_payoff:10.6f}   {np.array2string(r, precision=4)}")

# Skewed population: most users are weak, a few are strong.
skewed = TypeDistribution.piecewise_linear((1.0, 3.0, 10.0), (0.0, 0.8, 1.0))
report = solve_continuous(skewed, params, 40)
print(f"\nskewed population, 40 bins: PU payoff {report.pu_payoff:.6f}")

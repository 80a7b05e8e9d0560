"""Compare the three information regimes while the effort cost grows.

Cash-only selling (no hidden effort) gives an upper bound on the primary
user's revenue, a single full-installment contract (no hidden type) a lower
bound, and the joint menu sits in between.
"""

from contract_forge import MarketParams, TypeProfile
from contract_forge.model import ScenarioKind
from contract_forge.sweep import SweepSpec, SweepVariable, rows_to_csv, run_sweep

profile = TypeProfile.uniform([float(i) for i in range(1, 11)])
params = MarketParams(revenue=0.5, cost=5.0)
spec = SweepSpec(SweepVariable.COST_C, 1.0, 10.0, steps=10)
rows = run_sweep(profile, params, spec)

table = {}
for row in rows:
    table.setdefault(row.value, {})[row.report.regime] = row.report.pu_payoff

print(f"{'c':>5} {'cash only':>10} {'joint':>10} {'installment':>12}")
for c, pu in sorted(table.items()):
    print(f"{c:5.1f} {pu[ScenarioKind.ADVERSE_SELECTION_ONLY]:10.5f} "
          f"{pu[ScenarioKind.JOINT]:10.5f} {pu[ScenarioKind.MORAL_HAZARD_ONLY]:12.5f}")

# The same rows in the CSV layout the command line tool writes.
print()
print(rows_to_csv(rows, profile.n).splitlines()[0])

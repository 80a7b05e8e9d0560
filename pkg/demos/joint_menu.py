"""Build the financing menu for a ten-type market and inspect it.

Each secondary user type gets a (down payment, installment) pair. Stronger
types pay more up front and less out of realized revenue, and only the
weakest type ends up with zero surplus.
"""

from contract_forge import MarketParams, TypeProfile, solve_joint
from contract_forge.oracle import verify_binding_pattern

profile = TypeProfile.uniform([float(i) for i in range(1, 11)])
params = MarketParams(revenue=0.5, cost=5.0)
report = solve_joint(profile, params)

print(f"{'theta':>6} {'t':>9} {'r':>8} {'effort':>8} {'SU payoff':>10}")
for th, k, e, u in zip(profile.thetas, report.menu, report.efforts, report.su_payoffs):
    print(f"{th:6.1f} {k.down_payment:9.5f} {k.installment:8.5f} {e:8.4f} {u:10.6f}")

print(f"\nexpected PU payoff  {report.pu_payoff:.6f}")
print(f"social welfare      {report.welfare:.6f}")
print(f"menu is feasible    {report.constraints.feasible}")

# Participation of the weakest type and each step-down incentive constraint
# should be the only tight constraints.
audit = verify_binding_pattern(report, profile, params)
tight = [(row.kind, row.i, row.j) for row in audit.rows if abs(row.slack) < 1e-9]
print(f"binding pattern ok  {audit.holds} ({len(tight)} tight constraints)")

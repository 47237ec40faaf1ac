"""Concentration of the percolation time on a large torus.

With q = 0.01 on a 128 x 128 torus many sites start uninfected, so T > 0,
but a site survives the first step only if most of its neighbours are also
uninfected, which is rare.  T is therefore almost always exactly 1.
"""

from bootperc.dynamics import Rule
from bootperc.stochastic import TrialPlan, exact_rho1, run_time_distribution

plan = TrialPlan(d=2, n=128, rule=Rule("standard", 2), q=0.01, t=1, trials=200, seed=2026)
summary = run_time_distribution(plan)
print("law of T:", summary.empirical_T)
print("expected number of sites still uninfected after one step:", 128**2 * exact_rho1(2, plan.rule, 1, plan.q))

for q in (0.03, 0.06, 0.1):
    s = run_time_distribution(TrialPlan(2, 128, Rule("standard", 2), q, trials=100, seed=1))
    print(f"q={q}: {s.empirical_T}")

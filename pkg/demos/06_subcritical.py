"""Thresholds above the dimension: closed uninfected blocks stop percolation.

With r = 3 in two dimensions an uninfected 2x2 block never gets infected.
Dense uninfected starts almost surely contain one, so T = infinity; sparse
starts almost never do, and percolation finishes within a few steps.
"""

from bootperc import combinatorics as cb
from bootperc.dynamics import Rule
from bootperc.extremal import min_protecting_size
from bootperc.stochastic import TrialPlan, run_time_distribution

rule = Rule("standard", 3)
for q in (0.3, 0.05, 0.005):
    s = run_time_distribution(TrialPlan(2, 100, rule, q, trials=200, seed=3))
    print(f"q={q}: {s.empirical_T}")

print("\nsmallest sets protecting the origin, r=3:")
for t in range(4):
    print(f"  t={t}: {min_protecting_size(2, rule, t)[0]} (formula {cb.m(2, 3, t)})")

"""Exhaustive search for the smallest sets that keep the origin uninfected.

The search sweeps subsets of the ball, reduced by the hyperoctahedral
symmetry on the first shell and pruned by a monotone upper bound.  The k=0
census is compared with the semi-canonical family built by hand.
"""

from bootperc import combinatorics as cb
from bootperc.dynamics import Rule
from bootperc.extremal import census_by_excess, census_matches_semi_canonical, min_protecting_size, sphere_profile

for d, r, t in [(2, 2, 1), (2, 2, 2), (2, 2, 3), (3, 2, 2), (3, 3, 2)]:
    size, witness, nodes = min_protecting_size(d, Rule("standard", r), t)
    print(f"d={d} r={r} t={t}: minimum {size} (m = {cb.m(d, r, t)}), nodes visited {nodes}")

census = census_by_excess(2, Rule("standard", 2), 2, k_max=2)
print("\ncensus d=2 r=2 t=2 by excess:", [(e.k, e.count) for e in census.entries])
W = census.entry(0).witnesses[0]
print("one minimal witness:", sorted(W))
print("protected sites per sphere:", sphere_profile(W, 2, Rule("standard", 2), 2),
      "minimum per sphere:", [cb.l(2, 2, k) for k in range(3)])

for d, r in [(2, 2), (3, 3), (3, 2)]:
    rep = census_matches_semi_canonical(d, r, 2, census_by_excess(d, Rule("standard", r), 2, 0))
    print(f"\nd={d} r={r} t=2: census {rep['census_count']}, semi-canonical enumeration "
          f"{rep['enumeration_count']}, closed-form g {rep['formula_g']}, sets identical: {rep['match']}")

mod = census_by_excess(2, Rule("modified", 2), 3, 0)
print(f"\nmodified rule d=2 r=2 t=3: minimum {mod.ex}, number of minimal sets {mod.entry(0).count}")

"""Closed-form extremal counts and the binomial layer identities behind them.

m(d, r, t) is the smallest number of uninfected sites that can keep the
origin uninfected until time t; l(d, r, t) is how many of them must sit on
the sphere of radius t.  Both are iterated binomial sums.
"""

from bootperc import combinatorics as cb

print("m(d, r, t) for t = 0..5")
for d, r in [(2, 2), (3, 2), (3, 3), (4, 2), (4, 3)]:
    print(f"  d={d} r={r}:", [cb.m(d, r, t) for t in range(6)])

print("\nm grows by exactly l at each radius, and l(d, r, t) = m(d, r+1, t):")
for t in range(1, 5):
    print(f"  t={t}: m(4,2,t)-m(4,2,t-1) = {cb.m(4, 2, t) - cb.m(4, 2, t - 1)}, "
          f"l(4,2,t) = {cb.l(4, 2, t)}, m(4,3,t) = {cb.m(4, 3, t)}")

print("\nsplitting a layer sum into a codimension-one slab plus two half-spaces:")
res = cb.identity_mini(5, 3, 4, 6)
print(f"  d=5 r=3 f=4 k=6: lhs={res.lhs} rhs={res.rhs} holds={res.holds}")
res = cb.identity_mega(6, 2, 5, 8)
print(f"  fully iterated, d=6 r=2 f=5 k=8: lhs={res.lhs} rhs={res.rhs} holds={res.holds}")

print("\nmodified rule minimum is the volume of a (d-r+1)-dimensional l1 ball:")
print("  d=3 r=2:", [cb.m_modified(3, 2, t) for t in range(6)])

print("\nleading constants of the extremal probability: g(2,2) =", cb.g(2, 2), " g(3,3) =", cb.g(3, 3))

spec = cb.CanonicalSpec(3, 2, 2, orientation=(0,), signs=(1,))
K = cb.canonical_set(spec)
print(f"\na canonical set for d=3, r=2, t=2 has {len(K)} sites (m = {cb.m(3, 2, 2)}):")
print(" ", sorted(K))

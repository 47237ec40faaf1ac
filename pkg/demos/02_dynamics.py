"""Running the bootstrap process on a torus and in a window with infected exterior."""

import numpy as np

from bootperc import Configuration, Lattice, Rule, closure, percolation_time, protected_sites, step

torus = Lattice.torus(2, 8)

# a diagonal of infected sites fills the 8x8 torus under the 2-neighbour rule
diag = Configuration.from_infected(torus, Rule("standard", 2), [(i, i) for i in range(8)])
print("diagonal seed, percolation time:", percolation_time(diag))

# under the 3-neighbour rule an uninfected 2x2 block is closed and never fills
block = Configuration.from_uninfected(torus, Rule("standard", 3), [(0, 0), (0, 1), (1, 0), (1, 1)])
final, steps = closure(block)
print("2x2 uninfected block, r=3: steps to fixed point =", steps, " still uninfected =", final.num_uninfected)

# random start, showing the uninfected count at each step
rng = np.random.default_rng(1)
c = Configuration(torus, Rule("standard", 2), rng.random(torus.shape) > 0.35)
counts = [c.num_uninfected]
while c.num_uninfected and len(counts) < 20:
    c = step(c)
    counts.append(c.num_uninfected)
print("random start, uninfected per step:", counts)

# modified rule: infected neighbours must lie along two different axes
line = Configuration.from_infected(torus, Rule("modified", 2), [(0, 3), (2, 3)])
print("modified rule, infected neighbours along one axis only; middle infected:", step(line).is_infected((1, 3)))

# protected sites: those uninfected at the last moment they could still reach the origin
W = Lattice.window(2, 2)
U = [(0, 0), (1, 0), (-1, 0), (2, 0), (-2, 0), (0, 1), (1, 1), (-1, 1)]
conf = Configuration.from_uninfected(W, Rule("standard", 2), U)
P = protected_sites(conf, 2)
print("window B_2, origin protected:", (0, 0) in P, " protected sites:", sorted(P))

print("\nsnapshot JSON:", conf.to_json())

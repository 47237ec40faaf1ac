import math

import numpy as np
import pytest

from bootperc.dynamics import (
    Configuration,
    Rule,
    closure,
    percolation_time,
    protected_sites,
    step,
    trajectory,
    uninfected_count,
)
from bootperc.geometry import Lattice

import oracles

R2 = Rule("standard", 2)
R3 = Rule("standard", 3)


def block_2x2(n):
    return Configuration.from_uninfected(Lattice.torus(2, n), R3, [(0, 0), (0, 1), (1, 0), (1, 1)])


def test_rule_validation():
    with pytest.raises(ValueError):
        Rule("standard", 5).validate(2)
    with pytest.raises(ValueError):
        Rule("modified", 3).validate(2)
    with pytest.raises(ValueError):
        Rule("other", 2)
    with pytest.raises(ValueError):
        Configuration(Lattice.torus(2, 5), Rule("standard", 5), np.ones((5, 5), bool))


def test_step_fixed_points():
    T = Lattice.torus(2, 5)
    full = Configuration(T, R2, np.ones((5, 5), bool))
    assert np.array_equal(step(full).infected, full.infected)
    empty = Configuration(T, R2, np.zeros((5, 5), bool))
    assert not step(empty).infected.any()


def test_step_window_two_neighbours():
    W = Lattice.window(2, 2)
    c = Configuration.from_infected(W, R2, [(0, 1), (0, -1)])
    assert step(c).is_infected((0, 0))


def test_window_exterior_counts_as_infected():
    W = Lattice.window(2, 1)
    c = Configuration.from_uninfected(W, R2, [(0, 0), (1, 0), (0, 1), (-1, 0), (0, -1)])
    nxt = step(c)
    assert nxt.uninfected_sites() == {(0, 0)}


def test_step_matches_oracle_on_torus():
    rng = np.random.default_rng(3)
    for rule in (R2, R3, Rule("modified", 2)):
        for _ in range(20):
            arr = rng.random((6, 6)) < 0.6
            c = Configuration(Lattice.torus(2, 6), rule, arr)
            U = c.uninfected_sites()
            ref = oracles.torus_run(U, 2, 6, rule.r, 3, rule.is_modified)
            for k, layer in enumerate(trajectory(c, 3)):
                got = {tuple(map(int, v)) for v in np.argwhere(~layer)}
                assert got == ref[k]


def test_step_matches_oracle_in_window():
    rng = np.random.default_rng(4)
    W = Lattice.window(3, 2)
    for rule in (R2, R3, Rule("standard", 4), Rule("modified", 2), Rule("modified", 3)):
        for _ in range(15):
            arr = rng.random(W.num_sites) < 0.5
            c = Configuration(W, rule, arr)
            ref = oracles.window_run(c.uninfected_sites(), 3, rule.r, 2, rule.is_modified)
            for k, layer in enumerate(trajectory(c, 2)):
                got = {W.site(int(i)) for i in np.flatnonzero(~layer)}
                assert got == ref[k]


def test_closure_examples():
    T = Lattice.torus(2, 5)
    c = Configuration.from_uninfected(T, R2, [(2, 3)])
    final, steps = closure(c)
    assert final.num_uninfected == 0 and steps == 1
    again, more = closure(final)
    assert np.array_equal(again.infected, final.infected) and more == 0
    blk = block_2x2(6)
    final, steps = closure(blk)
    assert steps == 0 and np.array_equal(final.infected, blk.infected)


def test_closure_step_cap():
    c = Configuration.from_infected(Lattice.torus(2, 9), R2, [(i, i) for i in range(9)])
    with pytest.raises(RuntimeError):
        closure(c, max_steps=2)


def test_percolation_time():
    T = Lattice.torus(2, 5)
    assert percolation_time(Configuration(T, R2, np.ones((5, 5), bool))) == 0
    assert percolation_time(Configuration.from_uninfected(T, R2, [(0, 0)])) == 1
    assert math.isinf(percolation_time(block_2x2(7)))
    # a diagonal seed grows into a box and then fills the torus
    diag = Configuration.from_infected(Lattice.torus(2, 6), R2, [(i, i) for i in range(6)])
    assert percolation_time(diag) == 3
    with pytest.raises(ValueError):
        percolation_time(Configuration(Lattice.window(2, 1), R2, np.ones(5, bool)))


def test_protected_sites():
    W = Lattice.window(2, 1)
    c = Configuration.from_uninfected(W, R2, [(0, 0)])
    assert protected_sites(c, 0) == {(0, 0)}
    assert protected_sites(Configuration(W, R2, np.ones(5, bool)), 0) == set()
    U = [(0, 0), (1, 0), (0, 1), (-1, 0)]
    c = Configuration.from_uninfected(W, R2, U)
    assert protected_sites(c, 1) == set(U)


def test_protected_sites_on_torus_centre():
    T = Lattice.torus(2, 9)
    U = [(4, 4), (5, 4), (4, 5), (3, 4)]
    c = Configuration.from_uninfected(T, R2, U)
    assert protected_sites(c, 1, center=(4, 4)) == set(U)
    with pytest.raises(ValueError):
        protected_sites(c, 5)


def test_uninfected_count():
    T = Lattice.torus(2, 5)
    full = Configuration(T, R2, np.ones((5, 5), bool))
    assert [uninfected_count(full, t) for t in range(3)] == [0, 0, 0]
    rng = np.random.default_rng(0)
    c = Configuration(T, R2, rng.random((5, 5)) < 0.4)
    counts = [uninfected_count(c, t) for t in range(5)]
    assert counts[0] == 25 - np.count_nonzero(c.infected)
    assert all(a >= b for a, b in zip(counts, counts[1:]))


@pytest.mark.parametrize("lattice", [Lattice.torus(2, 7), Lattice.torus(3, 4), Lattice.window(2, 3), Lattice.window(3, 1)])
def test_snapshot_roundtrip(lattice):
    rng = np.random.default_rng(11)
    c = Configuration(lattice, Rule("modified", 2), rng.random(lattice.shape) < 0.5, time=4)
    back = Configuration.from_json(c.to_json())
    assert back.lattice == lattice and back.rule == c.rule and back.time == 4
    assert np.array_equal(back.infected, c.infected)


def test_snapshot_rejects_foreign_documents():
    with pytest.raises(ValueError):
        Configuration.from_json('{"format": "other", "version": 1}')


def test_bits_order():
    T = Lattice.torus(2, 3)
    c = Configuration.from_uninfected(T, R2, [(1, 0)])
    assert list(np.flatnonzero(~c.bits())) == [T.index((1, 0))]


def test_configuration_is_read_only():
    c = Configuration(Lattice.torus(2, 4), R2, np.ones((4, 4), bool))
    with pytest.raises(ValueError):
        c.infected[0, 0] = False

"""Brute-force oracles for minimal and near-minimal protecting sets.

A set ``U`` of the window ``B_t`` *protects* the origin when, starting with
exactly ``U`` uninfected and every other site (the exterior included)
infected, the origin is still uninfected at time ``t``.  By monotonicity of
the dynamics this is the worst case over all states outside ``U``.

Searches enumerate subsets containing the origin.  They are split by the part
``R`` of the subset on the unit sphere ``S_1``: each ``R`` is first tested
with every site of norm >= 2 uninfected, and discarded if even that cannot
protect the origin.  With symmetry reduction on, only one ``R`` per orbit of
the signed-permutation group is searched and counts are weighted by orbit
size, so reported counts are always over unreduced sets.
"""

from __future__ import annotations

import itertools
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Sequence

import numpy as np

from . import combinatorics as cb
from .dynamics import Configuration, Rule, pad_exterior, protected_sites, trajectory, window_step
from .geometry import Lattice, Site, apply_signed_permutation, l1_norm, signed_permutations

BATCH = 1 << 15


class BudgetExhausted(RuntimeError):
    """The requested search exceeds the configured budget."""


@dataclass(frozen=True)
class SearchBudget:
    max_subset_size: int | None = None
    symmetry: bool = True
    workers: int = 1
    node_cap: int | None = None
    witness_cap: int = 10_000


@dataclass
class CensusEntry:
    k: int
    count: int
    witnesses: list[frozenset[Site]] | None = None


@dataclass
class Census:
    d: int
    rule: Rule
    t: int
    ex: int
    entries: list[CensusEntry]
    runtime_ms: float = 0.0
    nodes_visited: int = 0

    def entry(self, k: int) -> CensusEntry:
        return next(e for e in self.entries if e.k == k)

    def to_dict(self) -> dict:
        entries = []
        for e in self.entries:
            item = {"k": e.k, "count": e.count}
            if e.witnesses is not None:
                item["witnesses"] = [sorted(list(x) for x in w) for w in e.witnesses]
            entries.append(item)
        return {
            "d": self.d,
            "r": self.rule.r,
            "rule": self.rule.kind,
            "t": self.t,
            "ex": self.ex,
            "entries": entries,
            "runtime_ms": self.runtime_ms,
            "nodes_visited": self.nodes_visited,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# -- single-set checks -------------------------------------------------------


def _window_config(U: Iterable[Sequence[int]], d: int, rule: Rule, t: int) -> Configuration:
    W = Lattice.window(d, t)
    U = [tuple(x) for x in U]
    for x in U:
        if len(x) != d or l1_norm(x) > t:
            raise ValueError(f"site {x} is not inside the window B_{t}")
    return Configuration.from_uninfected(W, rule, U)


def protects_origin(U: Iterable[Sequence[int]], d: int, rule: Rule, t: int) -> bool:
    c = _window_config(U, d, rule, t)
    final = trajectory(c, t)[-1]
    return not final[c.lattice.index(c.lattice.origin)]


def sphere_profile(U: Iterable[Sequence[int]], d: int, rule: Rule, t: int) -> list[int]:
    """``|P(S_k)|`` for ``k = 0..t``."""
    c = _window_config(U, d, rule, t)
    counts = [0] * (t + 1)
    for x in protected_sites(c, t):
        counts[l1_norm(x)] += 1
    return counts


def per_sphere_minimality(U: Iterable[Sequence[int]], d: int, r: int, t: int) -> bool:
    """Whether every sphere holds exactly the minimal number of protected sites."""
    profile = sphere_profile(U, d, Rule("standard", r), t)
    return all(profile[k] == cb.l(d, r, k) for k in range(t + 1))


def stability_prefix_check(U: Iterable[Sequence[int]], d: int, r: int, t: int, c: int) -> bool:
    """Whether the protected sites of ``U`` inside ``B_{t-c}`` form a canonical set."""
    if c < 0:
        raise ValueError("c must be >= 0")
    rule = Rule("standard", r)
    conf = _window_config(U, d, rule, t)
    if not protects_origin(U, d, rule, t):
        raise ValueError("U does not protect the origin")
    inner = t - c
    if inner < 0:
        return True
    P = frozenset(x for x in protected_sites(conf, t) if l1_norm(x) <= inner)
    return any(P == cb.canonical_set(s) for s in cb.canonical_specs(d, r, inner))


def subcritical_layer_bound(U: Iterable[Sequence[int]], d: int, r: int, t: int) -> bool:
    """Check ``|P(S_k)| >= binom(2d-r+1, k)`` and the summed ball bound for ``k <= t``."""
    if not d + 1 <= r <= 2 * d:
        raise ValueError(f"subcritical bound needs d+1 <= r <= 2d, got d={d}, r={r}")
    U = list(U)
    rule = Rule("standard", r)
    if not protects_origin(U, d, rule, t):
        raise ValueError("U does not protect the origin")
    profile = sphere_profile(U, d, rule, t)
    top = 2 * d - r + 1
    ball = 0
    for k in range(t + 1):
        ball += profile[k]
        if profile[k] < comb(top, k) or ball < sum(comb(top, j) for j in range(k + 1)):
            return False
    return True


# -- exhaustive search machinery ---------------------------------------------


def _protects_batch(uninfected: np.ndarray, nbr: np.ndarray, rule: Rule, t: int, origin: int) -> np.ndarray:
    state = pad_exterior(~uninfected)
    for _ in range(t):
        state = window_step(state, nbr, rule)
    return ~state[:, origin]


def _combination_batches(n: int, k: int, batch: int):
    if k == 0:
        yield np.empty((1, 0), dtype=np.intp)
        return
    it = itertools.combinations(range(n), k)
    while True:
        flat = np.fromiter(itertools.chain.from_iterable(itertools.islice(it, batch)), dtype=np.intp)
        if flat.size == 0:
            return
        yield flat.reshape(-1, k)


@dataclass
class _Layout:
    d: int
    t: int
    rule: Rule
    origin: int
    shell: list[int]  # indices of S_1
    rest: list[int]  # indices of norm >= 2
    num_sites: int
    nbr: np.ndarray = field(repr=False)
    group: np.ndarray = field(repr=False)  # (|G|, N) index permutations


def _layout(d: int, rule: Rule, t: int) -> _Layout:
    rule.validate(d)
    if t < 0:
        raise ValueError("t must be >= 0")
    W = Lattice.window(d, t)
    sites = list(W.sites())
    norms = [l1_norm(x) for x in sites]
    group = np.array(
        [[W.index(apply_signed_permutation(x, p, s)) for x in sites] for p, s in signed_permutations(d)],
        dtype=np.intp,
    )
    return _Layout(
        d=d,
        t=t,
        rule=rule,
        origin=W.index(W.origin),
        shell=[i for i, v in enumerate(norms) if v == 1],
        rest=[i for i, v in enumerate(norms) if v >= 2],
        num_sites=W.num_sites,
        nbr=np.array(W.neighbour_table),
        group=group,
    )


def _shell_classes(lay: _Layout, symmetry: bool) -> list[tuple[tuple[int, ...], int]]:
    """Subsets ``R`` of ``S_1`` to search, each with the number of subsets it stands for."""
    shell = lay.shell
    subsets = [c for k in range(len(shell) + 1) for c in itertools.combinations(shell, k)]
    if not symmetry:
        return [(R, 1) for R in subsets]
    out = []
    for R in subsets:
        images = {tuple(sorted(lay.group[g, list(R)])) for g in range(lay.group.shape[0])}
        if R == min(images):
            out.append((R, len(images)))
    return out


def _viable(lay: _Layout, R: tuple[int, ...]) -> bool:
    mask = np.zeros((1, lay.num_sites), dtype=bool)
    mask[0, [lay.origin, *R, *lay.rest]] = True
    return bool(_protects_batch(mask, lay.nbr, lay.rule, lay.t, lay.origin)[0])


def _sweep_task(args):
    lay, R, sizes, keep_cap, stop_at_first = args
    fixed = [lay.origin, *R]
    rest = np.array(lay.rest, dtype=np.intp)
    counts = {}
    found = {}
    visited = 0
    for s in sizes:
        j = s - len(fixed)
        counts[s] = 0
        found[s] = []
        if j < 0 or j > len(rest):
            continue
        for chunk in _combination_batches(len(rest), j, BATCH):
            B = chunk.shape[0]
            mask = np.zeros((B, lay.num_sites), dtype=bool)
            mask[:, fixed] = True
            if j:
                mask[np.arange(B)[:, None], rest[chunk]] = True
            hit = _protects_batch(mask, lay.nbr, lay.rule, lay.t, lay.origin)
            visited += B
            n_hit = int(np.count_nonzero(hit))
            counts[s] += n_hit
            if n_hit and (stop_at_first or len(found[s]) <= keep_cap):
                rows = np.flatnonzero(hit)[: 1 if stop_at_first else keep_cap + 1]
                for row in rows:
                    found[s].append(tuple(np.flatnonzero(mask[row])))
            if stop_at_first and n_hit:
                return counts, found, visited
    return counts, found, visited


def _planned_nodes(lay: _Layout, classes, sizes) -> int:
    n = len(lay.rest)
    return sum(comb(n, s - 1 - len(R)) for R, _ in classes for s in sizes if 0 <= s - 1 - len(R) <= n)


def _prepare(lay: _Layout, budget: SearchBudget, sizes: list[int]):
    if budget.max_subset_size is not None and max(sizes) > budget.max_subset_size:
        raise BudgetExhausted(f"subset size {max(sizes)} exceeds budget {budget.max_subset_size}")
    classes = _shell_classes(lay, budget.symmetry)
    viable = [(R, w) for R, w in classes if _viable(lay, R)]
    nodes = len(classes) + _planned_nodes(lay, viable, sizes)
    if budget.node_cap is not None and nodes > budget.node_cap:
        raise BudgetExhausted(f"search needs {nodes} nodes, cap is {budget.node_cap}")
    return classes, viable


def _run(tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [_sweep_task(a) for a in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_sweep_task, tasks))


def _expand(lay: _Layout, witnesses: Iterable[tuple[int, ...]], symmetry: bool) -> set[tuple[int, ...]]:
    out = set()
    for w in witnesses:
        if symmetry:
            for g in range(lay.group.shape[0]):
                out.add(tuple(sorted(lay.group[g, list(w)].tolist())))
        else:
            out.add(tuple(sorted(int(i) for i in w)))
    return out


def _to_sites(lay: _Layout, idx: Iterable[int]) -> frozenset[Site]:
    W = Lattice.window(lay.d, lay.t)
    return frozenset(W.site(int(i)) for i in idx)


def _exists(lay: _Layout, size: int, budget: SearchBudget):
    """First protecting set of exactly ``size`` sites, or ``None``; also returns nodes used."""
    classes, viable = _prepare(lay, budget, [size])
    visited = len(classes)
    for R, _ in viable:
        counts, found, v = _sweep_task((lay, R, [size], 0, True))
        visited += v
        if counts[size]:
            return found[size][0], visited
    return None, visited


def min_protecting_size(d: int, rule: Rule, t: int, budget: SearchBudget | None = None):
    """Exact minimum size of a set protecting the origin, with a witness.

    Existence of a protecting set of size ``s`` is monotone in ``s``, so the
    minimum is located by bisection with an exhaustive sweep at each probe.
    Returns ``(size, witness, nodes_visited)``.
    """
    budget = budget or SearchBudget()
    lay = _layout(d, rule, t)
    lo, hi = 0, lay.num_sites  # no set of size lo protects; the full ball does
    witness, nodes = _exists(lay, hi, budget)
    if witness is None:
        raise RuntimeError("the full ball does not protect the origin")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        w, v = _exists(lay, mid, budget)
        nodes += v
        if w is None:
            lo = mid
        else:
            hi, witness = mid, w
    return hi, _to_sites(lay, witness), nodes


def census_by_excess(d: int, rule: Rule, t: int, k_max: int, budget: SearchBudget | None = None) -> Census:
    """Exact number of protecting sets of size ``ex + k`` for ``k = 0..k_max``."""
    budget = budget or SearchBudget()
    started = time.perf_counter()
    lay = _layout(d, rule, t)
    ex, _, nodes = min_protecting_size(d, rule, t, budget)
    sizes = [s for s in range(ex, ex + k_max + 1) if s <= lay.num_sites]
    classes, viable = _prepare(lay, budget, sizes)
    nodes += len(classes)
    results = _run([(lay, R, sizes, budget.witness_cap, False) for R, _ in viable], budget.workers)
    entries = []
    for s in sizes:
        count = 0
        raw = []
        for (R, weight), (counts, found, v) in zip(viable, results):
            count += weight * counts[s]
            raw.extend(found[s])
        witnesses = None
        if count <= budget.witness_cap:
            expanded = _expand(lay, raw, budget.symmetry)
            if len(expanded) != count:
                raise RuntimeError(f"orbit expansion gave {len(expanded)} sets, expected {count}")
            witnesses = sorted((_to_sites(lay, w) for w in expanded), key=lambda S: sorted(S))
        entries.append(CensusEntry(s - ex, count, witnesses))
    nodes += sum(v for _, _, v in results)
    elapsed = (time.perf_counter() - started) * 1000
    return Census(d, rule, t, ex, entries, runtime_ms=elapsed, nodes_visited=nodes)


def census_matches_semi_canonical(d: int, r: int, t: int, census: Census) -> dict:
    """Compare k=0 census witnesses with the semi-canonical enumeration."""
    entry = census.entry(0)
    if entry.witnesses is None:
        raise ValueError("census did not retain k=0 witnesses")
    enumerated = {S for _, S in cb.enumerate_semi_canonical(d, r, t)}
    found = set(entry.witnesses)
    return {
        "d": d,
        "r": r,
        "t": t,
        "census_count": entry.count,
        "enumeration_count": len(enumerated),
        "formula_g": cb.g(d, r),
        "only_in_census": sorted(sorted(S) for S in found - enumerated),
        "only_in_enumeration": sorted(sorted(S) for S in enumerated - found),
        "match": found == enumerated,
    }

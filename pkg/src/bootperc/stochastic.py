"""Seeded Monte Carlo on the torus and exact small-ball probabilities.

Every trial draws from its own counter-based Philox stream keyed by
``(seed, trial_index)``, so results do not depend on how trials are grouped
or how many worker processes run them.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy import optimize, stats

from . import combinatorics as cb
from .dynamics import Configuration, Rule, torus_step
from .extremal import SearchBudget, census_by_excess
from .geometry import Lattice, ball_offsets, ball_size

log = logging.getLogger(__name__)

BLOCK = 250  # trials per work unit; fixed so that grouping never affects results


@dataclass(frozen=True)
class TrialPlan:
    d: int
    n: int
    rule: Rule
    q: float
    t: int = 1
    trials: int = 100
    seed: int = 0
    max_steps: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.q <= 1.0:
            raise ValueError(f"q must lie in [0, 1], got {self.q}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.t < 0:
            raise ValueError("t must be >= 0")
        Lattice.torus(self.d, self.n)
        self.rule.validate(self.d)

    @property
    def lattice(self) -> Lattice:
        return Lattice.torus(self.d, self.n)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["rule"] = {"kind": self.rule.kind, "r": self.rule.r}
        return out


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(trial_index,))
    return np.random.Generator(np.random.Philox(ss))


def _uninfected_field(plan: TrialPlan, trial_index: int) -> np.ndarray:
    rng = trial_rng(plan.seed, trial_index)
    flat = rng.random(plan.n**plan.d) < plan.q
    return flat.reshape((plan.n,) * plan.d, order="F")


def sample_configuration(plan: TrialPlan, trial_index: int) -> Configuration:
    """Each site infected independently with probability ``1 - q``."""
    return Configuration(plan.lattice, plan.rule, ~_uninfected_field(plan, trial_index))


# -- batched trials ----------------------------------------------------------


@dataclass
class TrialBlock:
    T: np.ndarray  # float, inf when percolation fails
    F: np.ndarray  # uninfected count at time plan.t
    pair_counts: np.ndarray | None = None  # per offset, summed over trials


def _offsets_2t(d: int, t: int) -> list[tuple[int, ...]]:
    # one representative of each +-v pair
    return [v for v in ball_offsets(d, 2 * t) if any(v) and v > tuple(-a for a in v)]


def _run_block(plan: TrialPlan, start: int, stop: int, pairs: bool = False) -> TrialBlock:
    d = plan.d
    uninf = np.stack([_uninfected_field(plan, i) for i in range(start, stop)])
    state = ~uninf
    lat_axes = tuple(range(1, d + 1))
    remaining = np.count_nonzero(uninf, axis=lat_axes)
    cap = int(remaining.max()) if plan.max_steps is None else plan.max_steps
    T = np.where(remaining == 0, 0.0, math.inf)
    F = remaining.copy() if plan.t == 0 else None
    at_t = state if plan.t == 0 else None
    active = np.flatnonzero(remaining > 0)
    k = 0
    while active.size or k < plan.t:
        if active.size:
            if k >= cap:
                raise RuntimeError(f"closure did not stabilise within {cap} steps")
            nxt = torus_step(state[active], plan.rule, d)
            changed = np.any(nxt != state[active], axis=lat_axes)
            state[active] = nxt
            left = np.count_nonzero(~nxt, axis=lat_axes)
            T[active[changed & (left == 0)]] = k + 1
            active = active[changed & (left > 0)]
        k += 1
        if k == plan.t:
            F = np.count_nonzero(~state, axis=lat_axes)
            at_t = state.copy()
    pair_counts = None
    if pairs:
        u = ~at_t
        offs = _offsets_2t(d, plan.t)
        pair_counts = np.array(
            [np.count_nonzero(u & np.roll(u, shift=v, axis=lat_axes)) for v in offs], dtype=np.int64
        )
    return TrialBlock(T, F.astype(np.int64), pair_counts)


def _block_task(args):
    return _run_block(*args)


def run_trials(plan: TrialPlan, jobs: int = 1, pairs: bool = False) -> TrialBlock:
    tasks = [(plan, s, min(s + BLOCK, plan.trials), pairs) for s in range(0, plan.trials, BLOCK)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            blocks = list(pool.map(_block_task, tasks))
    else:
        blocks = [_block_task(a) for a in tasks]
    return TrialBlock(
        np.concatenate([b.T for b in blocks]),
        np.concatenate([b.F for b in blocks]),
        sum(b.pair_counts for b in blocks) if pairs else None,
    )


# -- exact probabilities -----------------------------------------------------


@lru_cache(maxsize=None)
def protecting_counts(d: int, rule: Rule, t: int) -> tuple[int, ...]:
    """Number of protecting subsets of ``B_t`` by size (index = size)."""
    N = ball_size(d, t)
    census = census_by_excess(d, rule, t, k_max=N, budget=SearchBudget(witness_cap=0))
    counts = [0] * (N + 1)
    for e in census.entries:
        counts[census.ex + e.k] = e.count
    return tuple(counts)


def exact_rho1(d: int, rule: Rule, t: int, q: float) -> float:
    """Probability that a given site is still uninfected at time ``t``."""
    counts = protecting_counts(d, rule, t)
    N = len(counts) - 1
    p = 1.0 - q
    return math.fsum(c * q**s * p ** (N - s) for s, c in enumerate(counts) if c)


def rho1_asymptotic(d: int, r: int, t: int, q: float) -> float:
    return cb.g(d, r) * q ** cb.m(d, r, t)


def solve_q(d: int, rule: Rule, t: int, n: int, target_lambda: float) -> float:
    """``q`` at which the expected number of sites uninfected at time ``t`` equals ``target_lambda``."""
    f = lambda q: n**d * exact_rho1(d, rule, t, q) - target_lambda
    return optimize.brentq(f, 1e-12, 1.0 - 1e-12, xtol=1e-15, rtol=1e-13)


def stein_chen_bound(lam: float, n_sites: int, neighbourhood_size: int, rho1: float, rho2: float) -> float:
    """Barbour-Eagleson total-variation bound for translation-invariant indicators."""
    factor = 1.0 if lam <= 1.0 else 1.0 / lam
    return factor * (n_sites * neighbourhood_size * rho1**2 + n_sites * (neighbourhood_size - 1) * rho2)


def tv_to_poisson(values: np.ndarray, lam: float) -> float:
    """Total-variation distance between an empirical sample and Poisson(lam)."""
    values = np.asarray(values)
    top = int(max(values.max(initial=0), stats.poisson.ppf(1 - 1e-12, lam)))
    emp = np.bincount(values, minlength=top + 1)[: top + 1] / values.size
    pois = stats.poisson.pmf(np.arange(top + 1), lam)
    return 0.5 * (np.abs(emp - pois).sum() + stats.poisson.sf(top, lam))


def tbound_check(d: int, t: int, q: float, threshold: float = 0.5) -> float:
    """``max_{c <= 2d} t^c q``; warns when it is not small."""
    value = max(t, 1) ** (2 * d) * q
    if value >= threshold:
        log.warning("t^c q = %.3g >= %.3g for t=%d, q=%.3g: dense-regime approximations are loose", value, threshold, t, q)
    return value


# -- experiments -------------------------------------------------------------


def _histogram(values) -> dict[str, int]:
    c = Counter("inf" if math.isinf(v) else str(int(v)) for v in values)
    return dict(sorted(c.items(), key=lambda kv: math.inf if kv[0] == "inf" else int(kv[0])))


@dataclass
class SummaryStats:
    plan: TrialPlan
    T: np.ndarray = field(repr=False)
    F: np.ndarray = field(repr=False)

    @property
    def empirical_T(self) -> dict[str, int]:
        return _histogram(self.T)

    @property
    def empirical_F(self) -> dict[str, int]:
        return _histogram(self.F)

    def fraction_T(self, value: float) -> float:
        return float(np.mean(self.T == value))

    @property
    def mean_F(self) -> float:
        return float(self.F.mean())

    @property
    def var_F(self) -> float:
        return float(self.F.var(ddof=1)) if self.F.size > 1 else 0.0

    @property
    def ci_radius_F(self) -> float:
        """Three standard errors of the mean of F."""
        return 3.0 * math.sqrt(self.var_F / self.F.size)

    def rows(self):
        for i, (T, F) in enumerate(zip(self.T, self.F)):
            yield i, ("inf" if math.isinf(T) else int(T)), int(F)


def run_time_distribution(plan: TrialPlan, jobs: int = 1) -> SummaryStats:
    block = run_trials(plan, jobs)
    return SummaryStats(plan, block.T, block.F)


def poisson_comparison(plan: TrialPlan, jobs: int = 1) -> dict:
    """Compare the law of the number of sites uninfected at time ``plan.t`` with Poisson."""
    t = plan.t
    if plan.n <= 2 * t:
        raise ValueError(f"need n > 2t, got n={plan.n}, t={t}")
    block = run_trials(plan, jobs, pairs=True)
    summary = SummaryStats(plan, block.T, block.F)
    n_sites = plan.n**plan.d
    rho1 = exact_rho1(plan.d, plan.rule, t, plan.q)
    lam = n_sites * rho1
    # pair frequency per offset; each unordered pair appears once per site
    rho2 = float(block.pair_counts.max() / (n_sites * plan.trials)) if block.pair_counts.size else 0.0
    nbhd = ball_size(plan.d, 2 * t)
    tv = tv_to_poisson(block.F, lam)
    return {
        "summary": summary,
        "lambda_exact": lam,
        "rho1_exact": rho1,
        "rho2_estimate": rho2,
        "mean_F": summary.mean_F,
        "mean_error": abs(summary.mean_F - lam),
        "mean_tolerance": 3.0 * math.sqrt(lam / plan.trials),
        "fraction_F0": float(np.mean(block.F == 0)),
        "fraction_T_le_t": float(np.mean(block.T <= t)),
        "identity_violations": int(np.count_nonzero((block.T <= t) != (block.F == 0))),
        "tv_distance": tv,
        "stein_chen_bound": stein_chen_bound(lam, n_sites, nbhd, rho1, rho2),
        "tbound": tbound_check(plan.d, t, plan.q),
    }

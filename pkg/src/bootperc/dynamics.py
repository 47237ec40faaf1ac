"""The r-neighbour bootstrap process on tori and windows.

States are boolean arrays with ``True`` meaning *infected*.  The step kernels
work on a leading batch axis so that the same code drives single
configurations, Monte Carlo batches and exhaustive subset searches.
"""

from __future__ import annotations

import base64
import json
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .geometry import Lattice, Site

SNAPSHOT_FORMAT = "bootperc-config"
SNAPSHOT_VERSION = 1


@dataclass(frozen=True)
class Rule:
    """``standard``: at least ``r`` infected neighbours.  ``modified``: infected
    neighbours along at least ``r`` distinct axes."""

    kind: str = "standard"
    r: int = 2

    def __post_init__(self):
        if self.kind not in ("standard", "modified"):
            raise ValueError(f"unknown rule kind {self.kind!r}")
        if self.r < 2:
            raise ValueError(f"threshold must be >= 2, got {self.r}")

    def validate(self, d: int) -> None:
        top = 2 * d if self.kind == "standard" else d
        if not 2 <= self.r <= top:
            raise ValueError(f"{self.kind} rule needs 2 <= r <= {top} in dimension {d}, got r={self.r}")

    @property
    def is_modified(self) -> bool:
        return self.kind == "modified"


# -- kernels ---------------------------------------------------------------


def torus_step(infected: np.ndarray, rule: Rule, d: int) -> np.ndarray:
    """One update of a batch of torus states; the last ``d`` axes are the lattice."""
    nd = infected.ndim
    axes = range(nd - d, nd)
    count = np.zeros(infected.shape, dtype=np.uint8)
    if rule.is_modified:
        for a in axes:
            count += np.roll(infected, 1, axis=a) | np.roll(infected, -1, axis=a)
    else:
        for a in axes:
            count += np.roll(infected, 1, axis=a)
            count += np.roll(infected, -1, axis=a)
    return infected | (count >= rule.r)


def window_step(infected: np.ndarray, neighbour_table: np.ndarray, rule: Rule) -> np.ndarray:
    """One update of a batch of window states of shape ``(..., N + 1)``.

    The last column is the exterior and must be ``True``; it stays ``True``.
    """
    nbr = neighbour_table
    count = np.zeros(infected.shape[:-1] + (nbr.shape[0],), dtype=np.uint8)
    if rule.is_modified:
        for j in range(0, nbr.shape[1], 2):
            count += infected[..., nbr[:, j]] | infected[..., nbr[:, j + 1]]
    else:
        for j in range(nbr.shape[1]):
            count += infected[..., nbr[:, j]]
    out = infected.copy()
    out[..., :-1] |= count >= rule.r
    return out


def pad_exterior(infected: np.ndarray) -> np.ndarray:
    pad = np.ones(infected.shape[:-1] + (1,), dtype=bool)
    return np.concatenate([infected.astype(bool, copy=False), pad], axis=-1)


# -- configurations --------------------------------------------------------


@dataclass(frozen=True)
class Configuration:
    """An infected set on a lattice together with the rule driving it.

    ``infected`` has shape ``lattice.shape``.  For a torus ``infected[x]`` is
    the state of site ``x``; for a window it is indexed by site rank.
    """

    lattice: Lattice
    rule: Rule
    infected: np.ndarray = field(repr=False)
    time: int = 0

    def __post_init__(self):
        self.rule.validate(self.lattice.d)
        arr = np.array(self.infected, dtype=bool)
        if arr.shape != self.lattice.shape:
            raise ValueError(f"state shape {arr.shape} does not match lattice shape {self.lattice.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "infected", arr)

    @classmethod
    def from_uninfected(cls, lattice: Lattice, rule: Rule, uninfected: Sequence[Sequence[int]]) -> Configuration:
        arr = np.ones(lattice.shape, dtype=bool)
        for x in uninfected:
            arr[_key(lattice, x)] = False
        return cls(lattice, rule, arr)

    @classmethod
    def from_infected(cls, lattice: Lattice, rule: Rule, infected: Sequence[Sequence[int]]) -> Configuration:
        arr = np.zeros(lattice.shape, dtype=bool)
        for x in infected:
            arr[_key(lattice, x)] = True
        return cls(lattice, rule, arr)

    def is_infected(self, x: Sequence[int]) -> bool:
        return bool(self.infected[_key(self.lattice, x)])

    def uninfected_sites(self) -> set[Site]:
        lat = self.lattice
        if lat.is_torus:
            return {tuple(int(v) for v in idx) for idx in np.argwhere(~self.infected)}
        return {lat.site(int(i)) for i in np.flatnonzero(~self.infected)}

    @property
    def num_uninfected(self) -> int:
        return int(self.infected.size - np.count_nonzero(self.infected))

    def bits(self) -> np.ndarray:
        """States as a flat array in the documented site-index order."""
        if self.lattice.is_torus:
            return self.infected.ravel(order="F")
        return self.infected

    # -- snapshot format ---------------------------------------------

    def to_json(self) -> str:
        lat = self.lattice
        doc = {
            "format": SNAPSHOT_FORMAT,
            "version": SNAPSHOT_VERSION,
            "kind": lat.kind,
            "d": lat.d,
            ("n" if lat.is_torus else "t"): lat.n if lat.is_torus else lat.t,
            "rule": {"kind": self.rule.kind, "r": self.rule.r},
            "time": self.time,
            "bits": base64.b64encode(np.packbits(self.bits(), bitorder="little").tobytes()).decode("ascii"),
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> Configuration:
        doc = json.loads(text)
        if doc.get("format") != SNAPSHOT_FORMAT or doc.get("version") != SNAPSHOT_VERSION:
            raise ValueError("not a bootperc-config version 1 document")
        if doc["kind"] == "torus":
            lat = Lattice.torus(doc["d"], doc["n"])
        else:
            lat = Lattice.window(doc["d"], doc["t"])
        raw = np.frombuffer(base64.b64decode(doc["bits"]), dtype=np.uint8)
        flat = np.unpackbits(raw, count=lat.num_sites, bitorder="little").astype(bool)
        arr = flat.reshape(lat.shape, order="F") if lat.is_torus else flat
        rule = Rule(doc["rule"]["kind"], doc["rule"]["r"])
        return cls(lat, rule, arr, int(doc["time"]))


def _key(lattice: Lattice, x: Sequence[int]):
    x = lattice.validate(x)
    return x if lattice.is_torus else lattice.index(x)


def _advance(lattice: Lattice, rule: Rule, state: np.ndarray) -> np.ndarray:
    if lattice.is_torus:
        return torus_step(state, rule, lattice.d)
    return window_step(pad_exterior(state), lattice.neighbour_table, rule)[:-1]


def step(c: Configuration) -> Configuration:
    return replace(c, infected=_advance(c.lattice, c.rule, c.infected), time=c.time + 1)


def closure(c: Configuration, max_steps: int | None = None) -> tuple[Configuration, int]:
    """Iterate to the fixed point; returns it with the number of productive steps."""
    cap = c.num_uninfected if max_steps is None else max_steps
    state = c.infected
    steps = 0
    while True:
        nxt = _advance(c.lattice, c.rule, state)
        if np.array_equal(nxt, state):
            return replace(c, infected=state, time=c.time + steps), steps
        if steps >= cap:
            raise RuntimeError(f"closure did not stabilise within {cap} steps")
        state = nxt
        steps += 1


def percolation_time(c: Configuration, max_steps: int | None = None) -> float | int:
    """Least ``t`` with every site infected, or ``math.inf``."""
    if not c.lattice.is_torus:
        raise ValueError("percolation time is defined on a torus")
    final, steps = closure(c, max_steps)
    return steps if final.num_uninfected == 0 else math.inf


def trajectory(c: Configuration, t: int) -> list[np.ndarray]:
    """States ``A_0, ..., A_t`` starting from ``c``."""
    if t < 0:
        raise ValueError("horizon must be >= 0")
    out = [c.infected]
    for _ in range(t):
        out.append(_advance(c.lattice, c.rule, out[-1]))
    return out


def protected_sites(
    c: Configuration,
    t: int,
    center: Sequence[int] | None = None,
    layers: list[np.ndarray] | None = None,
) -> set[Site]:
    """Sites ``x`` of ``B_t(center)`` that are uninfected at time ``t - |x - center|``."""
    lat = c.lattice
    center = lat.origin if center is None else lat.validate(center)
    if lat.is_torus and 2 * t >= lat.n:
        raise ValueError(f"torus side {lat.n} too small for horizon {t}")
    if layers is None:
        layers = trajectory(c, t)
    elif len(layers) <= t:
        raise ValueError(f"horizon {t} exceeds stored trajectory of length {len(layers)}")
    out = set()
    for x in lat.ball_sites(center, t):
        k = lat.norm(x, center)
        if not layers[t - k][_key(lat, x)]:
            out.add(x)
    return out


def uninfected_count(c: Configuration, t: int) -> int:
    """``|V \\ A_t|``."""
    state = trajectory(c, t)[-1]
    return int(state.size - np.count_nonzero(state))

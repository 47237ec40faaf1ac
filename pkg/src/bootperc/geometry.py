"""Lattice geometry: sites, l1 balls and spheres, neighbours, order relations.

Two kinds of lattice are supported.  A *torus* of side ``n`` in dimension
``d`` has sites with coordinates in ``[0, n)``.  A *window* of radius ``t``
holds the l1 ball ``B_t`` around the origin, with signed coordinates; every
site outside the ball is treated as a single permanently infected exterior.

Axes are 0-based throughout (axis ``i`` is the coordinate ``x[i]``).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from math import comb
from typing import Iterator, Sequence

import numpy as np

Site = tuple[int, ...]

FREE = None  # compatibility tag for an unconstrained coordinate


def l1_norm(x: Sequence[int]) -> int:
    """Plain l1 norm of an integer vector."""
    return sum(abs(v) for v in x)


def ball_size(d: int, radius: int) -> int:
    """Number of points of Z^d with l1 norm at most ``radius``."""
    if radius < 0:
        return 0
    return sum(2**k * comb(d, k) * comb(radius, k) for k in range(min(d, radius) + 1))


def sphere_size(d: int, radius: int) -> int:
    return ball_size(d, radius) - ball_size(d, radius - 1)


def ball_offsets(d: int, radius: int) -> list[Site]:
    """All offsets of l1 norm <= radius, in lexicographic order."""
    if radius < 0:
        return []
    out = []

    def rec(prefix, budget):
        if len(prefix) == d:
            out.append(tuple(prefix))
            return
        for v in range(-budget, budget + 1):
            rec(prefix + [v], budget - abs(v))

    rec([], radius)
    return out


def sphere_offsets(d: int, radius: int) -> list[Site]:
    return [x for x in ball_offsets(d, radius) if l1_norm(x) == radius]


@dataclass(frozen=True)
class Lattice:
    """A torus ``(Z/nZ)^d`` or a window ``B_t`` with infected exterior.

    Build with :meth:`torus` or :meth:`window`.
    """

    kind: str
    d: int
    n: int | None = None
    t: int | None = None
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if self.kind == "torus":
            if self.n is None or self.n < 3:
                raise ValueError(f"torus side must be >= 3, got {self.n}")
        elif self.kind == "window":
            if self.t is None or self.t < 0:
                raise ValueError(f"window radius must be >= 0, got {self.t}")
        else:
            raise ValueError(f"unknown lattice kind {self.kind!r}")

    @classmethod
    def torus(cls, d: int, n: int) -> Lattice:
        return cls("torus", d, n=n)

    @classmethod
    def window(cls, d: int, t: int) -> Lattice:
        return cls("window", d, t=t)

    @property
    def is_torus(self) -> bool:
        return self.kind == "torus"

    @property
    def shape(self) -> tuple[int, ...]:
        """Array shape of a state on this lattice (torus: one axis per coordinate)."""
        if self.is_torus:
            return (self.n,) * self.d
        return (self.num_sites,)

    @property
    def num_sites(self) -> int:
        if self.is_torus:
            return self.n**self.d
        return ball_size(self.d, self.t)

    @property
    def origin(self) -> Site:
        return (0,) * self.d

    # -- site enumeration and indexing ---------------------------------

    @cached_property
    def _window_sites(self) -> list[Site]:
        return ball_offsets(self.d, self.t)

    @cached_property
    def _window_index(self) -> dict[Site, int]:
        return {x: i for i, x in enumerate(self._window_sites)}

    def sites(self) -> Iterator[Site]:
        """Sites in index order (torus: first coordinate varies fastest)."""
        if self.is_torus:
            for rev in itertools.product(range(self.n), repeat=self.d):
                yield rev[::-1]
        else:
            yield from self._window_sites

    def site(self, index: int) -> Site:
        if self.is_torus:
            out = []
            for _ in range(self.d):
                index, rem = divmod(index, self.n)
                out.append(rem)
            return tuple(out)
        return self._window_sites[index]

    def index(self, x: Sequence[int]) -> int:
        """Position of ``x`` in the documented bit-packing order."""
        self.validate(x)
        if self.is_torus:
            return sum(v * self.n**i for i, v in enumerate(x))
        return self._window_index[tuple(x)]

    def contains(self, x: Sequence[int]) -> bool:
        if len(x) != self.d:
            return False
        if self.is_torus:
            return all(0 <= v < self.n for v in x)
        return l1_norm(x) <= self.t

    def validate(self, x: Sequence[int]) -> Site:
        if len(x) != self.d:
            raise ValueError(f"site {tuple(x)} has dimension {len(x)}, lattice has {self.d}")
        if not self.contains(x):
            raise ValueError(f"site {tuple(x)} is not in {self}")
        return tuple(x)

    # -- metric ---------------------------------------------------------

    def offset(self, x: Sequence[int], center: Sequence[int] | None = None) -> Site:
        """Shortest displacement from ``center`` to ``x`` (wrapped on a torus)."""
        x = self.validate(x)
        c = self.origin if center is None else self.validate(center)
        if not self.is_torus:
            return tuple(a - b for a, b in zip(x, c))
        out = []
        for a, b in zip(x, c):
            v = (a - b) % self.n
            out.append(v if v <= self.n - v else v - self.n)
        return tuple(out)

    def norm(self, x: Sequence[int], center: Sequence[int] | None = None) -> int:
        """l1 distance from ``center`` (default: origin); wraps coordinate-wise on a torus."""
        return l1_norm(self.offset(x, center))

    def _translate(self, center: Site, off: Site) -> Site:
        y = tuple(a + b for a, b in zip(center, off))
        if self.is_torus:
            return tuple(v % self.n for v in y)
        return y

    def ball_sites(self, center: Sequence[int], radius: int) -> set[Site]:
        if radius < 0:
            raise ValueError("radius must be >= 0")
        center = self.validate(center)
        if self.is_torus and 2 * radius >= self.n:
            raise ValueError(f"ball of radius {radius} wraps onto itself on a torus of side {self.n}")
        out = {self._translate(center, off) for off in ball_offsets(self.d, radius)}
        if not self.is_torus and any(l1_norm(y) > self.t for y in out):
            raise ValueError(f"ball of radius {radius} around {center} leaves the window")
        return out

    def sphere_sites(self, center: Sequence[int], radius: int) -> set[Site]:
        center = self.validate(center)
        return {y for y in self.ball_sites(center, radius) if self.norm(y, center) == radius}

    # -- adjacency ------------------------------------------------------

    def neighbours(self, x: Sequence[int]) -> list[tuple[Site, bool]]:
        """The 2d neighbours ``x + e_i, x - e_i`` (axis by axis) with an exterior flag."""
        x = self.validate(x)
        out = []
        for i in range(self.d):
            for s in (1, -1):
                y = list(x)
                y[i] += s
                if self.is_torus:
                    y[i] %= self.n
                    out.append((tuple(y), False))
                else:
                    out.append((tuple(y), l1_norm(y) > self.t))
        return out

    @property
    def neighbour_table(self) -> np.ndarray:
        """Window only: ``(num_sites, 2d)`` neighbour indices; ``num_sites`` marks the exterior.

        Column ``2i`` is ``+e_i`` and column ``2i+1`` is ``-e_i``.
        """
        if self.is_torus:
            raise ValueError("neighbour_table is only defined for windows")
        if "nbr" not in self._cache:
            ext = self.num_sites
            tab = np.empty((self.num_sites, 2 * self.d), dtype=np.intp)
            for a, x in enumerate(self._window_sites):
                for j, (y, exterior) in enumerate(self.neighbours(x)):
                    tab[a, j] = ext if exterior else self._window_index[y]
            tab.setflags(write=False)
            self._cache["nbr"] = tab
        return self._cache["nbr"]

    @property
    def norms(self) -> np.ndarray:
        """Window only: l1 norm of every site in index order."""
        if "norms" not in self._cache:
            arr = np.array([l1_norm(x) for x in self.sites()], dtype=np.int64)
            arr.setflags(write=False)
            self._cache["norms"] = arr
        return self._cache["norms"]


def is_above(x: Sequence[int], y: Sequence[int]) -> bool:
    """True iff ``y`` is above ``x``: it moves away from the origin wherever ``x`` is nonzero."""
    if len(x) != len(y):
        raise ValueError("dimension mismatch")
    for a, b in zip(x, y):
        if a > 0 and b < a:
            return False
        if a < 0 and b > a:
            return False
    return True


@dataclass(frozen=True)
class CompatibilityFunction:
    """Per-axis tag in {-1, 0, +1, FREE} constraining sites relative to a base site."""

    tags: tuple

    def __post_init__(self):
        object.__setattr__(self, "tags", tuple(self.tags))
        for tag in self.tags:
            if tag not in (-1, 0, 1, FREE):
                raise ValueError(f"invalid compatibility tag {tag!r}")

    @classmethod
    def all_free(cls, d: int) -> CompatibilityFunction:
        return cls((FREE,) * d)

    @property
    def d(self) -> int:
        return len(self.tags)

    @property
    def pos(self) -> frozenset[int]:
        return frozenset(i for i, c in enumerate(self.tags) if c == 1)

    @property
    def neg(self) -> frozenset[int]:
        return frozenset(i for i, c in enumerate(self.tags) if c == -1)

    @property
    def fixed(self) -> frozenset[int]:
        return frozenset(i for i, c in enumerate(self.tags) if c == 0)

    @property
    def free(self) -> frozenset[int]:
        return frozenset(i for i, c in enumerate(self.tags) if c is FREE)


def is_compatible(x: Sequence[int], y: Sequence[int], C: CompatibilityFunction) -> bool:
    """Whether ``y`` is C-compatible with ``x``."""
    if not len(x) == len(y) == C.d:
        raise ValueError("dimension mismatch")
    for a, b, c in zip(x, y, C.tags):
        if c == 1 and b - a < 0:
            return False
        if c == -1 and b - a > 0:
            return False
        if c == 0 and b != a:
            return False
    return True


def restrict(C: CompatibilityFunction, i: int) -> CompatibilityFunction:
    """The ``i``-restriction of ``C``: axis ``i`` becomes fixed."""
    if not 0 <= i < C.d:
        raise ValueError(f"axis {i} out of range for d={C.d}")
    tags = list(C.tags)
    tags[i] = 0
    return CompatibilityFunction(tuple(tags))


def signed_permutations(d: int) -> Iterator[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Elements of the hyperoctahedral group as (axis permutation, signs)."""
    for perm in itertools.permutations(range(d)):
        for signs in itertools.product((1, -1), repeat=d):
            yield perm, signs


def apply_signed_permutation(x: Sequence[int], perm: Sequence[int], signs: Sequence[int]) -> Site:
    """Send coordinate ``i`` of ``x`` to axis ``perm[i]``, multiplied by ``signs[i]``."""
    y = [0] * len(x)
    for i, (p, s) in enumerate(zip(perm, signs)):
        y[p] = s * x[i]
    return tuple(y)

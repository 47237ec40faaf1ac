"""Exact extremal counts and canonical / semi-canonical protecting sets.

All counts are Python integers, so they never overflow.  Threshold ``r`` and
dimension ``d`` follow the usual convention: ``2 <= r <= d`` is the
supercritical range and ``d < r <= 2d`` the subcritical one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb, factorial

from .geometry import Site, ball_offsets, l1_norm


def gbinom(n: int, k: int) -> int:
    """Binomial coefficient for any integer ``n`` (falling factorial / k!), zero for k < 0.

    Pascal's rule holds for every integer ``n`` with this definition, which is
    what the layer identities below rely on when the top index goes negative.
    """
    if k < 0:
        return 0
    if n >= 0:
        return comb(n, k)
    num = 1
    for j in range(k):
        num *= n - j
    return num // factorial(k)


@lru_cache(maxsize=None)
def nested_sum(k: int, depth: int, f: int) -> int:
    """``sum_{i_1=0}^{k} sum_{i_2=0}^{i_1} ... sum_{i_depth=0}^{i_{depth-1}} binom(f, i_depth)``.

    ``depth == 0`` is just ``binom(f, k)``; an upper limit below zero gives an
    empty sum.
    """
    if depth == 0:
        return gbinom(f, k)
    if k < 0:
        return 0
    return sum(nested_sum(i, depth - 1, f) for i in range(k + 1))


def _check_supercritical(d: int, r: int) -> None:
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if not 2 <= r <= d:
        raise ValueError(f"need 2 <= r <= d, got d={d}, r={r}")


def _check_t(t: int) -> None:
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")


def m(d: int, r: int, t: int) -> int:
    """Size of a minimal set protecting the origin up to time ``t``.

    For ``r > d`` this is ``sum_{k<=t} binom(2d-r+1, k)``, the size of a
    ball-truncated ``(2d-r+1)``-dimensional hypercube.
    """
    _check_t(t)
    if d < 1 or not 2 <= r <= 2 * d:
        raise ValueError(f"need d >= 1 and 2 <= r <= 2d, got d={d}, r={r}")
    if r > d:
        return sum(comb(2 * d - r + 1, k) for k in range(t + 1))
    return nested_sum(t, d - r + 2, d)


def l(d: int, r: int, t: int) -> int:
    """Minimal number of protected sites on the sphere ``S_t``."""
    _check_supercritical(d, r)
    _check_t(t)
    return nested_sum(t, d - r + 1, d)


def m_modified(d: int, r: int, t: int) -> int:
    """Volume of the ``(d-r+1)``-dimensional l1 ball of radius ``t``; the modified-rule minimum."""
    _check_supercritical(d, r)
    _check_t(t)
    D = d - r + 1
    total = 0
    for i0 in range(min(D, t) + 1):
        # D nested sums of 1 with outer limit t - i0 count chains t-i0 >= i_1 >= ... >= i_D >= 0
        total += comb(D, i0) * comb(t - i0 + D, D)
    return total


def g(d: int, r: int) -> int:
    _check_supercritical(d, r)
    return comb(d, d - r + 1) * 2 ** (r - 1) * d ** (2 * (d - r + 1))


def g_modified(d: int, r: int) -> int:
    _check_supercritical(d, r)
    return comb(d, d - r + 1)


def g_replacement(d: int, r: int) -> int:
    """Semi-canonical count if every extreme site has ``r`` placements (``g`` uses ``d``)."""
    _check_supercritical(d, r)
    return comb(d, d - r + 1) * 2 ** (r - 1) * r ** (2 * (d - r + 1))


# -- layer identities ----------------------------------------------------


@dataclass(frozen=True)
class IdentityResult:
    holds: bool
    lhs: int
    rhs: int


def identity_mini(d: int, r: int, f: int, k: int) -> IdentityResult:
    """Split of a layer sum into a codimension-1 part and two parallel hyperplanes."""
    if not d >= r >= 2 or f < 0 or k < 0:
        raise ValueError(f"need d >= r >= 2, f >= 0, k >= 0; got {(d, r, f, k)}")
    D = d - r + 1
    lhs = nested_sum(k, D, f)
    rhs = 2 * nested_sum(k - 1, D, f - 1) + nested_sum(k, D - 1, f - 1)
    return IdentityResult(lhs == rhs, lhs, rhs)


def identity_mega(d: int, r: int, f: int, k: int) -> IdentityResult:
    """Fully iterated split: one pair of half-spaces per nesting level plus a base binomial.

    The j-th pair term nests from ``i_j`` down to ``i_{d-r+1}``, each inner
    limit being the previous index.
    """
    if not d > r >= 2 or not 0 <= f <= d or k < 0:
        raise ValueError(f"need d > r >= 2, 0 <= f <= d, k >= 0; got {(d, r, f, k)}")
    D = d - r + 1
    lhs = nested_sum(k, D, f)
    rhs = sum(2 * nested_sum(k - 1, D + 1 - j, f - j) for j in range(1, D + 1))
    rhs += gbinom(f - D, k)
    return IdentityResult(lhs == rhs, lhs, rhs)


def mega_rhs_by_mini(d: int, r: int, f: int, k: int) -> int:
    """Right side of :func:`identity_mega` obtained by re-splitting the codimension-1 term."""

    def split(depth, top):
        if depth == 0:
            return gbinom(top, k)
        return 2 * nested_sum(k - 1, depth, top - 1) + split(depth - 1, top - 1)

    return split(d - r + 1, f)


# -- canonical sets ------------------------------------------------------


@dataclass(frozen=True)
class CanonicalSpec:
    """Orientation axes ``I`` with signs; the other axes form the alignment.

    ``regime`` is ``"supercritical"`` (``|I| = r-1``) or ``"subcritical"``
    (``|I| = 2d-r+1``).
    """

    d: int
    r: int
    radius: int
    orientation: tuple[int, ...]
    signs: tuple[int, ...]
    center: Site | None = None
    regime: str = "supercritical"

    def __post_init__(self):
        if self.center is None:
            object.__setattr__(self, "center", (0,) * self.d)
        object.__setattr__(self, "orientation", tuple(self.orientation))
        object.__setattr__(self, "signs", tuple(self.signs))
        if self.regime == "supercritical":
            _check_supercritical(self.d, self.r)
            size = self.r - 1
        elif self.regime == "subcritical":
            if not self.d < self.r <= 2 * self.d:
                raise ValueError(f"subcritical spec needs d < r <= 2d, got d={self.d}, r={self.r}")
            size = 2 * self.d - self.r + 1
        else:
            raise ValueError(f"unknown regime {self.regime!r}")
        if len(set(self.orientation)) != size or len(self.orientation) != size:
            raise ValueError(f"orientation must be {size} distinct axes, got {self.orientation}")
        if any(not 0 <= i < self.d for i in self.orientation):
            raise ValueError("orientation axis out of range")
        if len(self.signs) != size or any(s not in (1, -1) for s in self.signs):
            raise ValueError("one sign in {-1, +1} per orientation axis required")
        if len(self.center) != self.d:
            raise ValueError("center has wrong dimension")
        _check_t(self.radius)

    @property
    def alignment(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.d) if i not in self.orientation)


def canonical_specs(d: int, r: int, t: int, regime: str = "supercritical") -> list[CanonicalSpec]:
    size = r - 1 if regime == "supercritical" else 2 * d - r + 1
    return [
        CanonicalSpec(d, r, t, I, eps, regime=regime)
        for I in itertools.combinations(range(d), size)
        for eps in itertools.product((1, -1), repeat=size)
    ]


def canonical_set(spec: CanonicalSpec) -> frozenset[Site]:
    """Sites of ``B_radius(center)`` whose orientation coordinates lie in ``{0, sign}``.

    Alignment coordinates are free in the supercritical regime and zero in the
    subcritical one.
    """
    align = spec.alignment
    out = []
    for bits in itertools.product((0, 1), repeat=len(spec.orientation)):
        budget = spec.radius - sum(bits)
        if budget < 0:
            continue
        rest = ball_offsets(len(align), budget) if spec.regime == "supercritical" else [(0,) * len(align)]
        for tail in rest:
            off = [0] * spec.d
            for i, s, b in zip(spec.orientation, spec.signs, bits):
                off[i] = s * b
            for i, v in zip(align, tail):
                off[i] = v
            out.append(tuple(c + v for c, v in zip(spec.center, off)))
    return frozenset(out)


def _adjacent(x: Site) -> list[Site]:
    out = []
    for i in range(len(x)):
        for s in (1, -1):
            y = list(x)
            y[i] += s
            out.append(tuple(y))
    return out


@dataclass(frozen=True)
class SemiCanonicalSpec:
    base: CanonicalSpec
    extremes: tuple[tuple[Site, Site], ...]  # (original degree-1 site, its placement)


def extreme_choices(K: frozenset[Site], radius: int, center: Site) -> list[tuple[Site, list[Site]]]:
    """Degree-1 sites of ``K`` with their allowed placements.

    A degree-1 site ``x`` with unique neighbour ``y`` in ``K`` may stay, or
    move to any neighbour of ``y`` inside the ball that is not already in ``K``.
    """
    out = []
    for x in sorted(K):
        inside = [y for y in _adjacent(x) if y in K]
        if len(inside) != 1:
            continue
        (y,) = inside
        moves = sorted(
            z
            for z in _adjacent(y)
            if z not in K and l1_norm(tuple(a - c for a, c in zip(z, center))) <= radius
        )
        out.append((x, [x] + moves))
    return out


def enumerate_semi_canonical(d: int, r: int, t: int) -> list[tuple[SemiCanonicalSpec, frozenset[Site]]]:
    """All distinct semi-canonical sets of radius ``t`` centred at the origin."""
    _check_supercritical(d, r)
    if t < 2:
        raise ValueError("semi-canonical sets need radius >= 2")
    seen: dict[frozenset[Site], SemiCanonicalSpec] = {}
    for spec in canonical_specs(d, r, t):
        K = canonical_set(spec)
        choices = extreme_choices(K, t, spec.center)
        originals = [x for x, _ in choices]
        for picks in itertools.product(*(opts for _, opts in choices)):
            S = frozenset((K - set(originals)) | set(picks))
            if S not in seen:
                seen[S] = SemiCanonicalSpec(spec, tuple(zip(originals, picks)))
    return [(spec, S) for S, spec in seen.items()]

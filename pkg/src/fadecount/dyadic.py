"""Dyadic intervals on [1, oo): membership, intersection, decomposition.

Level-l intervals are [k*2^l, (k+1)*2^l - 1] for k >= 1; intervals that
would start at 0 are excluded, so level l tiles [2^l, oo).  A position t
therefore lies in exactly floor(log2 t) + 1 intervals, one per level up to
floor(log2 t).

The decomposition of an arbitrary range [a, b] into at most two intervals
per level is computed by the standard two-pointer walk (climb both ends one
level at a time, emitting a singleton whenever an end is not aligned).  All
floor-log arithmetic is integer bit twiddling; no floats anywhere.
"""

from __future__ import annotations

from typing import NamedTuple, Optional

import numpy as np


class DyadicInterval(NamedTuple):
    """[index * 2**level, (index+1) * 2**level - 1], index >= 1."""

    level: int
    index: int

    @property
    def start(self) -> int:
        return self.index << self.level

    @property
    def end(self) -> int:
        return ((self.index + 1) << self.level) - 1

    def __contains__(self, t) -> bool:
        return self.start <= t <= self.end


def floor_log2(n: int) -> int:
    if n < 1:
        raise ValueError(f"floor_log2 needs n >= 1, got {n}")
    return n.bit_length() - 1


def containing_interval(t: int, level: int) -> Optional[DyadicInterval]:
    """The unique level-`level` interval containing t, or None.

    None exactly when floor(t / 2^level) == 0, i.e. the candidate would be
    the excluded interval starting at 0.
    """
    if t < 1:
        raise ValueError(f"position must be >= 1, got {t}")
    k = t >> level
    if k < 1:
        return None
    return DyadicInterval(level, k)


def intersect(t: int) -> list[DyadicInterval]:
    """All intervals containing t, ordered by level; length floor(log2 t)+1."""
    if t < 1:
        raise ValueError(f"position must be >= 1, got {t}")
    return [DyadicInterval(lvl, t >> lvl) for lvl in range(floor_log2(t) + 1)]


def decompose(a: int, b: int) -> list[DyadicInterval]:
    """Disjoint dyadic cover of [a, b], at most two intervals per level.

    Sorted by start position.  Max level never exceeds floor(log2(b-a+1)),
    and since ka >= 1 throughout, no interval starting at 0 can be emitted.
    """
    if a < 1 or a > b:
        raise ValueError(f"need 1 <= a <= b, got a={a}, b={b}")
    out = []
    ka, kb, lvl = a, b, 0
    while ka <= kb:
        if ka & 1:
            out.append(DyadicInterval(lvl, ka))
            ka += 1
        if not kb & 1:
            out.append(DyadicInterval(lvl, kb))
            kb -= 1
        ka >>= 1
        kb >>= 1
        lvl += 1
    out.sort(key=lambda iv: iv.start)
    return out


def decomposition_level_counts(length: int, positions: np.ndarray,
                               num_levels: int) -> np.ndarray:
    """Per-level interval counts of decompose(j, j+length-1) for many j at once.

    Returns an array of shape (num_levels, len(positions)) whose [l, i] entry
    is how many level-l intervals the decomposition starting at positions[i]
    uses (0, 1, or 2).

    This is the closed form of the two-pointer walk: at level l the walk's
    left cursor sits at ceil(j / 2^l) and the right cursor at
    floor((j+length) / 2^l) - 1; a left interval is emitted iff the left
    cursor is odd, a right interval iff the right cursor is even, in both
    cases only while left <= right.
    """
    j = positions.astype(np.int64)
    counts = np.zeros((num_levels, len(j)), dtype=np.int64)
    for lvl in range(num_levels):
        ca = (j + ((1 << lvl) - 1)) >> lvl
        cb = ((j + length) >> lvl) - 1
        active = ca <= cb
        counts[lvl] = ((active & ((ca & 1) == 1)).astype(np.int64)
                       + (active & ((cb & 1) == 0)))
    return counts


def decomposition_costs(length: int, start: int, stop: int,
                        weights) -> np.ndarray:
    """Weighted decomposition cost for every start position in [start, stop).

    Entry i is sum over intervals of decompose(start+i, start+i+length-1)
    of weights[level].  Same closed form as decomposition_level_counts but
    accumulated level by level, so memory stays one float row regardless of
    how many levels or positions are involved.
    """
    j = np.arange(start, stop, dtype=np.int64)
    cost = np.zeros(len(j))
    for lvl, w in enumerate(weights):
        ca = (j + ((1 << lvl) - 1)) >> lvl
        cb = ((j + length) >> lvl) - 1
        active = ca <= cb
        cnt = ((active & ((ca & 1) == 1)).astype(np.int64)
               + (active & ((cb & 1) == 0)))
        cost += w * cnt
    return cost

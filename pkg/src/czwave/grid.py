"""Dyadic cubes and exact box arithmetic.

A cube is (level, corner): side 2**-level, lower corner = corner * side with
``corner`` an integer lattice point.  All coordinates are dyadic rationals,
exactly representable in float64, so containment and adjacency tests below
are exact integer/float comparisons, not tolerance checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, order=True)
class Cube:
    level: int
    corner: tuple

    @property
    def d(self) -> int:
        return len(self.corner)

    @property
    def side(self) -> float:
        return 2.0 ** (-self.level)

    @property
    def lo(self):
        return np.asarray(self.corner, dtype=float) * self.side

    @property
    def hi(self):
        return (np.asarray(self.corner, dtype=float) + 1.0) * self.side

    @property
    def center(self):
        return (np.asarray(self.corner, dtype=float) + 0.5) * self.side

    @property
    def measure(self) -> float:
        return self.side ** self.d

    def box(self):
        return self.lo, self.hi

    def dilate(self, a: float):
        """Box of the dilate aQ (same center, side a*side)."""
        c = self.center
        h = 0.5 * a * self.side
        return c - h, c + h

    def parent(self) -> "Cube":
        return Cube(self.level - 1, tuple(c >> 1 for c in self.corner))

    def children(self):
        base = tuple(2 * c for c in self.corner)
        out = []
        for m in range(1 << self.d):
            off = tuple((m >> i) & 1 for i in range(self.d))
            out.append(Cube(self.level + 1, tuple(b + o for b, o in zip(base, off))))
        return out

    def contains_cube(self, other: "Cube") -> bool:
        if other.level < self.level:
            return False
        shift = other.level - self.level
        return all((oc >> shift) == sc for oc, sc in zip(other.corner, self.corner))

    def contains_point(self, x) -> bool:
        lo, hi = self.box()
        return bool(np.all(x >= lo) and np.all(x < hi))

    def touches(self, other: "Cube") -> bool:
        """Closures intersect (exact dyadic comparison)."""
        lvl = max(self.level, other.level)
        sa, sb = 1 << (lvl - self.level), 1 << (lvl - other.level)
        for ca, cb in zip(self.corner, other.corner):
            alo, ahi = ca * sa, (ca + 1) * sa
            blo, bhi = cb * sb, (cb + 1) * sb
            if ahi < blo or bhi < alo:
                return False
        return True


def cube_at(level: int, point) -> Cube:
    """The dyadic cube of the given level containing the point."""
    s = 2.0 ** level
    return Cube(level, tuple(int(math.floor(x * s)) for x in point))


def long_distance(a, b) -> float:
    """max(|c(Q)-c(S)|, l(Q), l(S)) for cubes or (lo, hi) boxes."""
    ca, la = _center_side(a)
    cb, lb = _center_side(b)
    return max(float(np.linalg.norm(ca - cb)), la, lb)


def _center_side(q):
    if isinstance(q, Cube):
        return q.center, q.side
    lo, hi = q
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    return 0.5 * (lo + hi), float(np.max(hi - lo))


def box_distance(a, b) -> float:
    """Euclidean distance between two closed boxes ((lo,hi) pairs)."""
    alo, ahi = (np.asarray(v, float) for v in a)
    blo, bhi = (np.asarray(v, float) for v in b)
    gap = np.maximum(0.0, np.maximum(blo - ahi, alo - bhi))
    return float(np.linalg.norm(gap))


def box_intersection(a, b):
    """Intersection box or None if the interiors are disjoint."""
    alo, ahi = (np.asarray(v, float) for v in a)
    blo, bhi = (np.asarray(v, float) for v in b)
    lo = np.maximum(alo, blo)
    hi = np.minimum(ahi, bhi)
    if np.any(hi <= lo):
        return None
    return lo, hi


def box_measure(box) -> float:
    lo, hi = box
    return float(np.prod(np.asarray(hi, float) - np.asarray(lo, float)))


def point_box_distance(x, box) -> float:
    lo, hi = box
    g = np.maximum(0.0, np.maximum(np.asarray(lo, float) - x, x - np.asarray(hi, float)))
    return float(np.linalg.norm(g))


def rect_union_measure(rects) -> float:
    """Exact area/length of a union of boxes (coordinate sweep).

    Supports d=1 and d=2; inputs are (lo, hi) pairs.
    """
    rects = [(np.asarray(lo, float), np.asarray(hi, float)) for lo, hi in rects]
    rects = [r for r in rects if np.all(r[1] > r[0])]
    if not rects:
        return 0.0
    d = len(rects[0][0])
    if d == 1:
        ivs = sorted((float(lo[0]), float(hi[0])) for lo, hi in rects)
        total, cur_lo, cur_hi = 0.0, *ivs[0]
        for lo, hi in ivs[1:]:
            if lo > cur_hi:
                total += cur_hi - cur_lo
                cur_lo, cur_hi = lo, hi
            else:
                cur_hi = max(cur_hi, hi)
        return total + (cur_hi - cur_lo)
    xs = np.unique(np.concatenate([[r[0][0], r[1][0]] for r in rects]))
    total = 0.0
    for x0, x1 in zip(xs[:-1], xs[1:]):
        xm = 0.5 * (x0 + x1)
        ivs = [(r[0][1], r[1][1]) for r in rects if r[0][0] <= xm <= r[1][0]]
        if ivs:
            total += (x1 - x0) * rect_union_measure([((a,), (b,)) for a, b in ivs])
    return total


def box_in_union_measure(box, rects) -> float:
    """Exact measure of box intersected with a union of boxes."""
    clipped = []
    for r in rects:
        it = box_intersection(box, r)
        if it is not None:
            clipped.append(it)
    return rect_union_measure(clipped)

"""Domain oracles: membership, sound distance lower bounds, exact clipping.

Every domain carries a membership test, a distance-to-complement lower
bound (an underestimate, so separation checks never falsely pass), and an
enumeration window bounding the region where cubes are generated.  The
rectilinear kinds (box, slab, axis-aligned polygons) also expose exact
boundary segments and exact box clipping, which the geometry checks and the
compressed-kernel integrals use.
"""

from __future__ import annotations

import math

import numpy as np

from .grid import box_intersection, box_measure


def _seg_point_dist(p, a, b):
    p, a, b = (np.asarray(v, float) for v in (p, a, b))
    ab = b - a
    t = float(np.dot(p - a, ab) / max(np.dot(ab, ab), 1e-300))
    t = min(1.0, max(0.0, t))
    return float(np.linalg.norm(p - (a + t * ab)))


def _seg_box_dist(box, a, b):
    """Exact distance between a closed box and a segment (d=2)."""
    lo, hi = (np.asarray(v, float) for v in box)
    a, b = np.asarray(a, float), np.asarray(b, float)
    # sample-free: distance is attained at a corner/edge pairing; use the
    # standard reduction to point-segment and segment-segment distances
    corners = [np.array([lo[0], lo[1]]), np.array([hi[0], lo[1]]),
               np.array([hi[0], hi[1]]), np.array([lo[0], hi[1]])]
    if _seg_intersects_box(a, b, lo, hi):
        return 0.0
    dmin = min(_seg_point_dist(c, a, b) for c in corners)
    edges = [(corners[i], corners[(i + 1) % 4]) for i in range(4)]
    for p in (a, b):
        for ea, eb in edges:
            dmin = min(dmin, _seg_point_dist(p, ea, eb))
    return dmin


def _seg_intersects_box(a, b, lo, hi):
    t0, t1 = 0.0, 1.0
    d = b - a
    for i in range(len(lo)):
        if abs(d[i]) < 1e-300:
            if a[i] < lo[i] or a[i] > hi[i]:
                return False
            continue
        ta, tb = (lo[i] - a[i]) / d[i], (hi[i] - a[i]) / d[i]
        if ta > tb:
            ta, tb = tb, ta
        t0, t1 = max(t0, ta), min(t1, tb)
    return t1 >= t0


class Domain:
    """Base domain; subclasses fill in the oracle methods."""

    kind = "abstract"

    def __init__(self, d: int, window):
        self.d = d
        self.window = None if window is None else tuple(np.asarray(v, float) for v in window)

    def contains(self, p) -> bool:
        raise NotImplementedError

    def dist_lb(self, p) -> float:
        """Lower bound for dist(p, complement); 0 if p outside."""
        raise NotImplementedError

    def outside_dist_lb(self, p) -> float:
        """Lower bound for dist(p, domain); 0 if p inside."""
        return 0.0

    def boundary_segments(self):
        return None

    def complement_dist_box(self, box):
        """Exact dist(box, complement) for kinds that support it, else None."""
        return None

    def clip_box(self, box):
        """Exact list of boxes tiling box & domain, or None if inexact."""
        return None

    def complement_boxes(self, within):
        """Exact list of boxes tiling within minus domain, or None."""
        return None

    def measure_in(self, box) -> float:
        clipped = self.clip_box(box)
        if clipped is None:
            raise NotImplementedError
        return sum(box_measure(b) for b in clipped)

    def is_empty(self) -> bool:
        return False

    def descriptor(self) -> dict:
        return {"kind": self.kind, "d": self.d,
                "window": None if self.window is None else
                [list(self.window[0]), list(self.window[1])]}


class WholeSpace(Domain):
    kind = "whole-space"

    def __init__(self, d: int, window):
        super().__init__(d, window)

    def contains(self, p):
        return True

    def dist_lb(self, p):
        return math.inf

    def clip_box(self, box):
        return [box]

    def complement_boxes(self, within):
        return []


class EmptyDomain(Domain):
    kind = "empty"

    def __init__(self, d: int):
        super().__init__(d, None)

    def contains(self, p):
        return False

    def dist_lb(self, p):
        return 0.0

    def outside_dist_lb(self, p):
        return math.inf

    def is_empty(self):
        return True

    def clip_box(self, box):
        return []


class BoxDomain(Domain):
    """Open axis-aligned box; the whole box boundary is domain boundary."""

    kind = "box"

    def __init__(self, lo, hi):
        lo, hi = np.asarray(lo, float), np.asarray(hi, float)
        super().__init__(len(lo), (lo, hi))
        self.lo, self.hi = lo, hi

    def contains(self, p):
        return bool(np.all(p > self.lo) and np.all(p < self.hi))

    def dist_lb(self, p):
        if not self.contains(p):
            return 0.0
        return float(min(np.min(p - self.lo), np.min(self.hi - p)))

    def outside_dist_lb(self, p):
        g = np.maximum(0.0, np.maximum(self.lo - p, p - self.hi))
        return float(np.linalg.norm(g))

    def complement_dist_box(self, box):
        blo, bhi = (np.asarray(v, float) for v in box)
        return float(max(0.0, min(np.min(blo - self.lo), np.min(self.hi - bhi))))

    def boundary_segments(self):
        if self.d == 1:
            return [(self.lo.copy(), self.lo.copy()), (self.hi.copy(), self.hi.copy())]
        lo, hi = self.lo, self.hi
        c = [np.array([lo[0], lo[1]]), np.array([hi[0], lo[1]]),
             np.array([hi[0], hi[1]]), np.array([lo[0], hi[1]])]
        return [(c[i], c[(i + 1) % 4]) for i in range(4)]

    def clip_box(self, box):
        it = box_intersection(box, (self.lo, self.hi))
        return [] if it is None else [it]

    def complement_boxes(self, within):
        from .quadrature import annulus_boxes

        it = box_intersection(within, (self.lo, self.hi))
        if it is None:
            return [within]
        inner = (np.maximum(self.lo, within[0]), np.minimum(self.hi, within[1]))
        return annulus_boxes(inner, within)

    def descriptor(self):
        out = super().descriptor()
        out.update(lo=list(self.lo), hi=list(self.hi))
        return out


class SlabDomain(Domain):
    """Half-space slab {a < x_axis < b}; the window only bounds enumeration."""

    kind = "slab"

    def __init__(self, axis: int, a: float, b: float, window):
        lo, hi = (np.asarray(v, float) for v in window)
        super().__init__(len(lo), (lo, hi))
        self.axis, self.a, self.b = axis, float(a), float(b)

    def contains(self, p):
        return bool(self.a < p[self.axis] < self.b)

    def dist_lb(self, p):
        if not self.contains(p):
            return 0.0
        return float(min(p[self.axis] - self.a, self.b - p[self.axis]))

    def outside_dist_lb(self, p):
        x = p[self.axis]
        return float(max(0.0, max(self.a - x, x - self.b)))

    def complement_dist_box(self, box):
        blo, bhi = (np.asarray(v, float) for v in box)
        return float(max(0.0, min(blo[self.axis] - self.a, self.b - bhi[self.axis])))

    def boundary_segments(self):
        if self.d == 1:
            return [(np.array([self.a]), np.array([self.a])),
                    (np.array([self.b]), np.array([self.b]))]
        lo, hi = self.window
        big = 8.0 * float(np.max(hi - lo)) + 8.0
        t = 1 - self.axis
        segs = []
        for v in (self.a, self.b):
            p0, p1 = np.zeros(2), np.zeros(2)
            p0[self.axis] = p1[self.axis] = v
            p0[t], p1[t] = lo[t] - big, hi[t] + big
            segs.append((p0, p1))
        return segs

    def clip_box(self, box):
        lo = np.array(box[0], float).copy()
        hi = np.array(box[1], float).copy()
        lo[self.axis] = max(lo[self.axis], self.a)
        hi[self.axis] = min(hi[self.axis], self.b)
        if np.any(hi <= lo):
            return []
        return [(lo, hi)]

    def complement_boxes(self, within):
        lo, hi = (np.asarray(v, float) for v in within)
        out = []
        if lo[self.axis] < self.a:
            h = hi.copy()
            h[self.axis] = min(h[self.axis], self.a)
            if np.all(h > lo):
                out.append((lo.copy(), h))
        if hi[self.axis] > self.b:
            l2 = lo.copy()
            l2[self.axis] = max(l2[self.axis], self.b)
            if np.all(hi > l2):
                out.append((l2, hi.copy()))
        return out

    def descriptor(self):
        out = super().descriptor()
        out.update(axis=self.axis, a=self.a, b=self.b)
        return out


class RectilinearDomain(Domain):
    """Open union of axis-aligned closed rectangles (e.g. an L-shape)."""

    kind = "polygon"

    def __init__(self, rects):
        rects = [tuple(np.asarray(v, float) for v in r) for r in rects]
        lo = np.min([r[0] for r in rects], axis=0)
        hi = np.max([r[1] for r in rects], axis=0)
        super().__init__(len(lo), (lo, hi))
        self.rects = rects
        self._cells = self._grid_cells()
        self._segs = None

    def _grid_cells(self):
        xs = np.unique(np.concatenate([[r[0][0], r[1][0]] for r in self.rects]))
        ys = np.unique(np.concatenate([[r[0][1], r[1][1]] for r in self.rects]))
        inside = []
        outside = []
        for i in range(len(xs) - 1):
            for j in range(len(ys) - 1):
                cell = (np.array([xs[i], ys[j]]), np.array([xs[i + 1], ys[j + 1]]))
                mid = 0.5 * (cell[0] + cell[1])
                if any(np.all(mid >= r[0]) and np.all(mid <= r[1]) for r in self.rects):
                    inside.append(cell)
                else:
                    outside.append(cell)
        return {"xs": xs, "ys": ys, "inside": inside, "outside": outside}

    def _in_closed(self, p):
        return any(np.all(p >= r[0]) and np.all(p <= r[1]) for r in self.rects)

    def contains(self, p):
        return self._in_closed(p) and self.dist_boundary(p) > 0.0

    def boundary_segments(self):
        if self._segs is not None:
            return self._segs
        segs = []
        for cell in self._cells["inside"]:
            lo, hi = cell
            c = [np.array([lo[0], lo[1]]), np.array([hi[0], lo[1]]),
                 np.array([hi[0], hi[1]]), np.array([lo[0], hi[1]])]
            for i in range(4):
                a, b = c[i], c[(i + 1) % 4]
                mid = 0.5 * (a + b)
                n = np.array([-(b - a)[1], (b - a)[0]])
                n = n / max(np.linalg.norm(n), 1e-300)
                eps = 1e-9 * (1.0 + np.linalg.norm(mid))
                s1 = self._in_closed(mid + eps * n)
                s2 = self._in_closed(mid - eps * n)
                if s1 != s2:
                    segs.append((a, b))
        self._segs = segs
        return segs

    def dist_boundary(self, p):
        return min(_seg_point_dist(p, a, b) for a, b in self.boundary_segments())

    def dist_lb(self, p):
        if not self._in_closed(p):
            return 0.0
        return self.dist_boundary(p)

    def outside_dist_lb(self, p):
        if self._in_closed(p):
            return 0.0
        return min(_box_point_dist(p, r) for r in self.rects)

    def _seg_arrays(self):
        if getattr(self, "_segarr", None) is None:
            segs = self.boundary_segments()
            a = np.array([s[0] for s in segs])
            b = np.array([s[1] for s in segs])
            self._segarr = (np.minimum(a, b), np.maximum(a, b))
        return self._segarr

    def complement_dist_box(self, box):
        blo, bhi = (np.asarray(v, float) for v in box)
        mid = 0.5 * (blo + bhi)
        slo, shi = self._seg_arrays()
        gap = np.maximum(0.0, np.maximum(blo[None, :] - shi, slo - bhi[None, :]))
        d = float(np.min(np.hypot(gap[:, 0], gap[:, 1])))
        if d == 0.0:
            return 0.0
        return d if self._in_closed(mid) else 0.0

    def clip_box(self, box):
        out = []
        for cell in self._cells["inside"]:
            it = box_intersection(box, cell)
            if it is not None:
                out.append(it)
        return out

    def complement_boxes(self, within):
        from .quadrature import annulus_boxes

        lo, hi = (np.asarray(v, float) for v in within)
        wlo, whi = self.window
        out = list(annulus_boxes((np.maximum(lo, wlo), np.minimum(hi, whi)), (lo, hi)) \
                   if np.all(whi > lo) and np.all(hi > wlo) else [(lo, hi)])
        out = [b for b in out if box_measure(b) > 0]
        for cell in self._cells["outside"]:
            it = box_intersection(within, cell)
            if it is not None:
                out.append(it)
        return out

    def descriptor(self):
        out = super().descriptor()
        out.update(rects=[[list(r[0]), list(r[1])] for r in self.rects])
        return out


def _box_point_dist(p, box):
    lo, hi = box
    g = np.maximum(0.0, np.maximum(lo - p, p - hi))
    return float(np.linalg.norm(g))


class LipschitzGraphDomain(Domain):
    """Subgraph {(x, y): x0 < x < x1, y0 < y < g(x)} with g Lipschitz."""

    kind = "lipschitz-graph"

    def __init__(self, g, lip: float, x0: float, x1: float, y0: float, ymax: float):
        super().__init__(2, (np.array([x0, y0]), np.array([x1, ymax])))
        self.g, self.lip = g, float(lip)
        self.x0, self.x1, self.y0 = float(x0), float(x1), float(y0)

    def contains(self, p):
        return bool(self.x0 < p[0] < self.x1 and self.y0 < p[1] < self.g(p[0]))

    def dist_lb(self, p):
        if not self.contains(p):
            return 0.0
        graph = (self.g(p[0]) - p[1]) / math.sqrt(1.0 + self.lip ** 2)
        return float(min(p[0] - self.x0, self.x1 - p[0], p[1] - self.y0, graph))

    def outside_dist_lb(self, p):
        if self.contains(p):
            return 0.0
        dx = max(0.0, self.x0 - p[0], p[0] - self.x1)
        dy = max(0.0, self.y0 - p[1])
        over = max(0.0, p[1] - self.g(min(max(p[0], self.x0), self.x1)))
        dg = over / math.sqrt(1.0 + self.lip ** 2)
        return float(max(dx, dy, dg) if (dx or dy or over) else 0.0)

    def descriptor(self):
        out = super().descriptor()
        out.update(lip=self.lip, x0=self.x0, x1=self.x1, y0=self.y0)
        return out


def make_domain(spec: dict) -> Domain:
    """Build a domain from a plain config mapping."""
    kind = spec["kind"]
    if kind == "whole-space":
        w = spec.get("window")
        return WholeSpace(spec["d"], (np.asarray(w[0], float), np.asarray(w[1], float)))
    if kind == "empty":
        return EmptyDomain(spec["d"])
    if kind == "box":
        return BoxDomain(spec["lo"], spec["hi"])
    if kind == "slab":
        w = spec["window"]
        return SlabDomain(spec.get("axis", 1), spec["a"], spec["b"],
                          (np.asarray(w[0], float), np.asarray(w[1], float)))
    if kind == "polygon":
        return RectilinearDomain([(np.asarray(r[0], float), np.asarray(r[1], float))
                                  for r in spec["rects"]])
    if kind == "lipschitz-graph":
        amp = spec.get("amp", 0.25)
        per = spec.get("period", 1.0)
        lip = 2 * math.pi * amp / per

        def g(x):
            return spec.get("height", 1.0) + amp * math.sin(2 * math.pi * x / per)

        return LipschitzGraphDomain(g, lip, spec["x0"], spec["x1"], spec["y0"],
                                    spec.get("height", 1.0) + amp + 0.1)
    raise ValueError(f"unknown domain kind: {kind}")

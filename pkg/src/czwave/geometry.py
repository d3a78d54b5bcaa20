"""Whitney decompositions and the multiresolution index set.

The decomposition is grown top-down on the standard dyadic grid.  A cube is
accepted once its distance to the complement provably exceeds sep times its
side: exactly (via boundary segments) for polygonal kinds, else through the
1-Lipschitz bound dist_lb(center) - diag/2.  Cubes finer than 2^-max_level
are dropped and their measure reported as uncovered.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .domains import Domain, _seg_box_dist
from .grid import Cube, box_measure, long_distance

__all__ = [
    "WhitneyDecomposition", "Multiresolution", "whitney_decompose",
    "long_distance", "partition_near_far", "verify_w1_w4",
]


class GeometryError(ValueError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


def _cube_sep_distance(domain: Domain, q: Cube):
    """Exact dist(Q, complement) when the kind supports it, else a sound
    underestimate; returns (value, exact_flag)."""
    exact = domain.complement_dist_box(q.box())
    if exact is not None:
        if exact > 0.0 and domain.outside_dist_lb(q.center) > 0.0:
            return 0.0, True
        return exact, True
    c = q.center
    segs = domain.boundary_segments()
    if segs is not None:
        if not domain.contains(c):
            return 0.0, True
        if domain.d == 1:
            d = min(abs(float(c[0]) - float(s[0][0])) - 0.5 * q.side for s in segs)
            return max(0.0, d), True
        d = min(_seg_box_dist(q.box(), a, b) for a, b in segs)
        return d, True
    diag = 0.5 * q.side * math.sqrt(domain.d)
    return max(0.0, domain.dist_lb(c) - diag), False


def _surely_outside(domain: Domain, q: Cube) -> bool:
    diag = 0.5 * q.side * math.sqrt(domain.d)
    return domain.outside_dist_lb(q.center) > diag


@dataclass
class WhitneyDecomposition:
    domain: Domain
    sep: float
    max_level: int
    cubes: list
    adjacency: list
    uncovered_measure: float
    uncovered_count: int
    w3_ratio: float = field(default=0.0)
    w4_overlap: int = field(default=0)

    @property
    def d(self):
        return self.domain.d

    def index(self):
        return {c: i for i, c in enumerate(self.cubes)}

    def neighbors(self):
        nbr = [[] for _ in self.cubes]
        for i, j in self.adjacency:
            nbr[i].append(j)
            nbr[j].append(i)
        return nbr

    def to_json(self) -> str:
        return json.dumps({
            "domain": self.domain.descriptor(),
            "sep": self.sep,
            "max_level": self.max_level,
            "uncovered_measure": self.uncovered_measure,
            "cubes": [{"level": c.level, "corner": list(c.corner),
                       "whitney": True, "root": i}
                      for i, c in enumerate(self.cubes)],
            "adjacency": [[int(i), int(j)] for i, j in self.adjacency],
        }, indent=1, sort_keys=True)


def whitney_decompose(domain: Domain, sep: float, max_level: int) -> WhitneyDecomposition:
    """Greedy top-down Whitney decomposition with parameter ``sep``.

    Accepted cubes satisfy dist(Q, complement) >= sep*l(Q) by construction
    (checked exactly for polygonal kinds).  Requires sep >= 4.
    """
    if sep < 4:
        raise GeometryError(f"sep must be >= 4, got {sep}")
    if domain.is_empty():
        return WhitneyDecomposition(domain, sep, max_level, [], [], 0.0, 0)
    if isinstance(domain, type(None)) or domain.kind == "whole-space":
        return WhitneyDecomposition(domain, sep, max_level, [], [], 0.0, 0)

    lo, hi = domain.window
    extent = float(np.max(hi - lo))
    level0 = -int(math.ceil(math.log2(max(extent, 1e-12))))
    side0 = 2.0 ** (-level0)
    roots = []
    idx_lo = [int(math.floor(lo[i] / side0)) for i in range(domain.d)]
    idx_hi = [int(math.ceil(hi[i] / side0)) for i in range(domain.d)]
    for ci in range(idx_lo[0], idx_hi[0]):
        if domain.d == 1:
            roots.append(Cube(level0, (ci,)))
        else:
            for cj in range(idx_lo[1], idx_hi[1]):
                roots.append(Cube(level0, (ci, cj)))

    accepted, uncovered, n_unc = [], 0.0, 0
    stack = roots[::-1]
    while stack:
        q = stack.pop()
        if _surely_outside(domain, q):
            continue
        dist, exact = _cube_sep_distance(domain, q)
        if dist >= sep * q.side and (exact or domain.contains(q.center)):
            accepted.append(q)
            continue
        if q.level < max_level:
            stack.extend(q.children())
        else:
            try:
                m = domain.measure_in(q.box())
            except NotImplementedError:
                m = q.measure
            if m > 0:
                uncovered += m
                n_unc += 1

    accepted.sort()
    dec = WhitneyDecomposition(domain, sep, max_level, accepted, [], uncovered, n_unc)
    dec.adjacency = _adjacency(accepted)
    dec.w3_ratio = _w3_ratio(dec)
    return dec


def _adjacency(cubes):
    """Touching pairs via same-level neighbor positions plus ancestor walk."""
    bykey = {(c.level, c.corner): i for i, c in enumerate(cubes)}
    min_level = min((c.level for c in cubes), default=0)
    edges = set()
    for i, q in enumerate(cubes):
        d = q.d
        for off in _neighbor_offsets(d):
            nc = tuple(c + o for c, o in zip(q.corner, off))
            probe = Cube(q.level, nc)
            while probe.level >= min_level:
                j = bykey.get((probe.level, probe.corner))
                if j is not None:
                    if j != i and q.touches(cubes[j]):
                        edges.add((min(i, j), max(i, j)))
                    break
                probe = probe.parent()
    return sorted(edges)


def _neighbor_offsets(d):
    if d == 1:
        return [(-1,), (1,)]
    return [(i, j) for i in (-1, 0, 1) for j in (-1, 0, 1) if (i, j) != (0, 0)]


def _w3_ratio(dec: WhitneyDecomposition) -> float:
    r = 1.0
    for i, j in dec.adjacency:
        a, b = dec.cubes[i].side, dec.cubes[j].side
        r = max(r, a / b, b / a)
    return r


def verify_w1_w4(dec: WhitneyDecomposition, rng=None, n_samples: int = 10_000):
    """Exact (W1)-(W2) checks and measured (W3)-(W4) constants.

    Returns a report dict; raises GeometryError on any (W1)/(W2) violation
    (oracle inconsistency).
    """
    cubes = dec.cubes
    bykey = {(c.level, c.corner): i for i, c in enumerate(cubes)}
    if len(bykey) != len(cubes):
        raise GeometryError("duplicate cubes violate (W1)")
    min_level = min((c.level for c in cubes), default=0)
    for c in cubes:
        p = c
        while p.level > min_level:
            p = p.parent()
            if (p.level, p.corner) in bykey:
                raise GeometryError("nested cubes violate (W1)", witness=(c, p))
    w2_margin = math.inf
    for c in cubes:
        dist, exact = _cube_sep_distance(dec.domain, c)
        if exact:
            if dist < dec.sep * c.side - 1e-12 * c.side:
                raise GeometryError("(W2) violated", witness=c)
            w2_margin = min(w2_margin, dist / (dec.sep * c.side))
        else:
            lb = dec.domain.dist_lb(c.center) - 0.5 * c.side * math.sqrt(dec.d)
            if lb < dec.sep * c.side - 1e-12:
                raise GeometryError("(W2) soundness check failed", witness=c)
    rng = rng or np.random.default_rng(0)
    w4 = 0
    if cubes:
        lo, hi = dec.domain.window
        pts = rng.uniform(lo, hi, size=(n_samples, dec.d))
        boxes = [c.dilate(2.0 * dec.sep) for c in cubes]
        blo = np.array([b[0] for b in boxes])
        bhi = np.array([b[1] for b in boxes])
        counts = np.zeros(n_samples, dtype=np.int64)
        step = max(1, 4_000_000 // max(1, n_samples))
        for s in range(0, len(boxes), step):
            inside = np.all(
                (pts[:, None, :] >= blo[None, s:s + step, :])
                & (pts[:, None, :] <= bhi[None, s:s + step, :]), axis=2)
            counts += inside.sum(axis=1)
        w4 = int(counts.max())
    dec.w4_overlap = w4
    return {"n_cubes": len(cubes), "w2_margin": w2_margin,
            "w3_ratio": dec.w3_ratio, "w4_overlap": w4,
            "uncovered_measure": dec.uncovered_measure}


class Multiresolution:
    """Whitney cubes plus the truncated dyadic subtrees below them.

    Wavelet index cubes sit at relative depths 0..depth-1 under each root
    (the root itself carries both the scaling functions and a wavelet
    vector); leaf cells sit at relative depth ``depth``.  For a whole-space
    domain there are no Whitney cubes and the index set is the truncated
    standard grid on the window.
    """

    def __init__(self, whitney: WhitneyDecomposition, depth: int, w_dil: float = 2.0):
        if depth < 1:
            raise GeometryError("depth must be >= 1")
        self.whitney = whitney
        self.depth = depth
        self.w_dil = w_dil
        self.domain = whitney.domain
        self.snodes = []          # (cube, root_index, rel_depth)
        self.leaf_cells = []      # (cube, root_index)
        if whitney.domain.kind == "whole-space":
            self._build_global()
        else:
            for w_i, w in enumerate(whitney.cubes):
                frontier = [w]
                for rel in range(depth):
                    for c in frontier:
                        self.snodes.append((c, w_i, rel))
                    frontier = [ch for c in frontier for ch in c.children()]
                for c in frontier:
                    self.leaf_cells.append((c, w_i))
        self.scube_index = {}
        for s_i, (c, w_i, rel) in enumerate(self.snodes):
            self.scube_index[c] = s_i

    def _build_global(self):
        lo, hi = self.domain.window
        extent = float(np.max(hi - lo))
        level0 = -int(math.floor(math.log2(max(extent, 1e-12))))
        side0 = 2.0 ** (-level0)
        roots = []
        for ci in range(int(math.floor(lo[0] / side0)), int(math.ceil(hi[0] / side0))):
            if self.domain.d == 1:
                roots.append(Cube(level0, (ci,)))
            else:
                for cj in range(int(math.floor(lo[1] / side0)),
                                int(math.ceil(hi[1] / side0))):
                    roots.append(Cube(level0, (ci, cj)))
        for r_i, r in enumerate(sorted(roots)):
            frontier = [r]
            for rel in range(self.depth):
                for c in frontier:
                    self.snodes.append((c, -1 - r_i, rel))
                frontier = [ch for c in frontier for ch in c.children()]
            for c in frontier:
                self.leaf_cells.append((c, -1 - r_i))

    @property
    def d(self):
        return self.domain.d

    def all_cubes(self):
        """The index set as a plain cube list (Whitney cubes first)."""
        cubes = list(self.whitney.cubes)
        seen = set(cubes)
        for c, _, rel in self.snodes:
            if c not in seen:
                seen.add(c)
                cubes.append(c)
        return cubes

    def root_of(self, s_index: int) -> int:
        return self.snodes[s_index][1]

    def whitney_root_cube(self, s_index: int):
        w_i = self.snodes[s_index][1]
        return self.whitney.cubes[w_i] if w_i >= 0 else None

    def to_json(self) -> str:
        cubes = []
        for i, c in enumerate(self.whitney.cubes):
            cubes.append({"level": c.level, "corner": list(c.corner),
                          "whitney": True, "root": i})
        for c, w_i, rel in self.snodes:
            cubes.append({"level": c.level, "corner": list(c.corner),
                          "whitney": False, "root": w_i})
        return json.dumps({
            "domain": self.domain.descriptor(),
            "sep": self.whitney.sep,
            "depth": self.depth,
            "cubes": cubes,
            "adjacency": [[int(i), int(j)] for i, j in self.whitney.adjacency],
        }, indent=1, sort_keys=True)


def partition_near_far(s: Cube, mres: Multiresolution, c_a=(0.125, 4.0)):
    """Split the index set into the near family A(S) and the rest I(S).

    A(S) = {P : l(P) >= c1*l(S), |c(P)-c(S)| <= c2*l(P)}.  The tuning must
    give the Whitney-intersection property: every Whitney cube whose
    w_dil-dilate meets the dilate of S lies in A(S); verified by
    enumeration, with a witness on failure.
    """
    c1, c2 = c_a
    cubes = mres.all_cubes()
    near, far = [], []
    for p in cubes:
        if p.side >= c1 * s.side and _center_gap(p, s) <= c2 * p.side:
            near.append(p)
        else:
            far.append(p)
    w = mres.w_dil
    near_set = set(near)
    for q in mres.whitney.cubes:
        if _dilates_meet(q, s, w) and q not in near_set:
            raise GeometryError("(A/I) tuning misses a Whitney neighbor",
                                witness=(q, s))
    return near, far


def _center_gap(p: Cube, s: Cube) -> float:
    return float(np.linalg.norm(p.center - s.center))


def _dilates_meet(a: Cube, b: Cube, w: float) -> bool:
    alo, ahi = a.dilate(w)
    blo, bhi = b.dilate(w)
    return bool(np.all(ahi >= blo) and np.all(bhi >= alo))


def render_svg(dec: WhitneyDecomposition, path: str, extra_boxes=None,
               width: int = 800):
    """SVG of a 2D decomposition, cube outlines colored by level."""
    if dec.d != 2:
        raise GeometryError("SVG rendering is 2D only")
    lo, hi = dec.domain.window
    span = float(np.max(hi - lo))
    scale = width / span

    def xy(p):
        return (p[0] - lo[0]) * scale, (hi[1] - p[1]) * scale

    levels = sorted({c.level for c in dec.cubes})
    palette = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
               "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]
    color = {lv: palette[i % len(palette)] for i, lv in enumerate(levels)}
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
           f'height="{int((hi[1]-lo[1])*scale)+1}">']
    for c in dec.cubes:
        x, y = xy((c.lo[0], c.hi[1]))
        s = c.side * scale
        out.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{s:.2f}" height="{s:.2f}" '
                   f'fill="none" stroke="{color[c.level]}" stroke-width="0.6"/>')
    for blo, bhi, col in (extra_boxes or []):
        x, y = xy((blo[0], bhi[1]))
        out.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{(bhi[0]-blo[0])*scale:.2f}" '
                   f'height="{(bhi[1]-blo[1])*scale:.2f}" fill="{col}" '
                   f'fill-opacity="0.25" stroke="none"/>')
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out))

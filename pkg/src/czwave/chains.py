"""Admissible chains, packing diagnostics, and boundary window systems.

Chains between Whitney cubes are shortest paths in the adjacency graph for
the total-side-length cost, computed by Dijkstra with deterministic tie
breaking; minimal chains are canonical and certify the smallest admissible
constant.  Window systems follow the constructive recipe: companions at
scale r0, roots at r1 = r0/(C*D*L) with all three constants measured on
the instance, and the ordered shadow comes from the shortest-path tree of
each companion (so the order is automatically reflexive and transitive).
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import GeometryError, WhitneyDecomposition, long_distance
from .grid import box_in_union_measure

__all__ = ["Chain", "ChainBuilder", "build_chain", "check_admissible",
           "packing_profile", "WindowSystem", "build_windows", "ordered_shadow"]


@dataclass
class Chain:
    ids: list
    cubes: list
    central_index: int

    def __len__(self):
        return len(self.ids)

    @property
    def central_id(self):
        return self.ids[self.central_index]

    def certify(self):
        """Largest of the admissibility ratios; this is the certified L."""
        u1, u2a, u2b, _ = self.ratios()
        return max(u1, u2a, u2b)

    def ratios(self):
        q, w = self.cubes[0], self.cubes[-1]
        dqw = long_distance(q, w)
        u1 = sum(c.side for c in self.cubes) / dqw
        u2a, wit_a = 0.0, None
        for p in self.cubes[: self.central_index + 1]:
            r = long_distance(q, p) / p.side
            if r > u2a:
                u2a, wit_a = r, p
        u2b, wit_b = 0.0, None
        for p in self.cubes[self.central_index:]:
            r = long_distance(p, w) / p.side
            if r > u2b:
                u2b, wit_b = r, p
        return u1, u2a, u2b, (wit_a, wit_b)


class ChainBuilder:
    """Shortest-sum-of-sides chains on the Whitney adjacency graph."""

    def __init__(self, dec: WhitneyDecomposition):
        self.dec = dec
        self.cubes = dec.cubes
        self.nbr = [sorted(v) for v in dec.neighbors()]
        self.sides = np.array([c.side for c in dec.cubes])
        self._trees = {}

    def tree(self, target: int):
        """Single-source Dijkstra tree from ``target``; parent map + costs.

        Path cost is the sum of cube sides over the path including both
        endpoints; ties are broken deterministically by predecessor id.
        """
        if target in self._trees:
            return self._trees[target]
        n = len(self.cubes)
        cost = np.full(n, np.inf)
        parent = np.full(n, -1, dtype=np.int64)
        cost[target] = self.sides[target]
        heap = [(cost[target], target)]
        done = np.zeros(n, dtype=bool)
        while heap:
            c, u = heapq.heappop(heap)
            if done[u]:
                continue
            done[u] = True
            for v in self.nbr[u]:
                nc = c + self.sides[v]
                if nc < cost[v] - 1e-15 or (abs(nc - cost[v]) <= 1e-15
                                            and 0 <= parent[v] and u < parent[v]):
                    cost[v] = nc
                    parent[v] = u
                    heapq.heappush(heap, (nc, v))
        self._trees[target] = (parent, cost)
        return parent, cost

    def path(self, source: int, target: int):
        parent, cost = self.tree(target)
        if source != target and parent[source] < 0:
            return None
        ids = [source]
        while ids[-1] != target:
            ids.append(int(parent[ids[-1]]))
        return ids

    def chain(self, source: int, target: int) -> Chain:
        ids = self.path(source, target)
        if ids is None:
            raise GeometryError("cubes lie in different adjacency components",
                                witness=(source, target))
        cubes = [self.cubes[i] for i in ids]
        best = max(range(len(ids)), key=lambda t: (cubes[t].side, -ids[t]))
        return Chain(ids, cubes, best)


def build_chain(p: int, q: int, dec: WhitneyDecomposition,
                builder: ChainBuilder = None) -> Chain:
    builder = builder or ChainBuilder(dec)
    return builder.chain(p, q)


def check_admissible(chain: Chain, L: float):
    """Evaluate (U1), (U2a), (U2b) at level L; returns (ok, witness)."""
    u1, u2a, u2b, wits = chain.ratios()
    if u1 > L:
        return False, ("U1", chain.cubes[0], chain.cubes[-1])
    if u2a > L:
        return False, ("U2a", wits[0])
    if u2b > L:
        return False, ("U2b", wits[1])
    return True, None


def packing_profile(dec: WhitneyDecomposition, ref: int, builder=None,
                    est1_samples=None, k_values=(1, 2)):
    """Scale/distance cube counts around a reference cube and the fitted
    Holder exponent, plus numeric evaluations of the two packing sums.

    counts[(i, j)] = #{Q : l(Q) = 2^-i l(W), longdist(Q, W) <= 2^j l(W)};
    the fit solves log2 count ~ (i+j)(d - eps) over occupied cells with
    i >= 0, j >= 1.  est2 reports, for t in {l(W)/4, inf}, the empirical
    constant of sum_{l(P)<=t} |P| / d(W,P)^(d+1)  <=  C min(1,t/l)^eps / l.
    """
    w = dec.cubes[ref]
    d = dec.d
    counts = {}
    for q in dec.cubes:
        i = q.level - w.level
        dist = long_distance(q, w)
        j = max(0, int(math.ceil(math.log2(max(dist / w.side, 1.0)))))
        counts[(i, j)] = counts.get((i, j), 0) + 1
    cum = {}
    jmax = max(j for _, j in counts)
    for (i, j), c in counts.items():
        for jj in range(j, jmax + 1):
            cum[(i, jj)] = cum.get((i, jj), 0) + c
    pts = [((i + j), math.log2(c)) for (i, j), c in cum.items() if i >= 0 and j >= 1]
    if len({x for x, _ in pts}) < 3:
        fit_eps = None
    else:
        xs = np.array([x for x, _ in pts], float)
        ys = np.array([y for _, y in pts], float)
        slope = float(np.polyfit(xs, ys, 1)[0])
        fit_eps = d - slope

    def est2_const(t):
        lhs = 0.0
        for p in dec.cubes:
            if p.side <= t:
                lhs += p.measure / long_distance(w, p) ** (d + 1)
        eps = fit_eps if fit_eps is not None else 1.0
        bound = min(1.0, t / w.side) ** eps / w.side
        return lhs, lhs / bound

    est2 = {t: est2_const(tv) for t, tv in
            [("l/4", w.side / 4), ("inf", math.inf)]}

    est1 = []
    if est1_samples:
        builder = builder or ChainBuilder(dec)
        for (q_id, r_box, t, k) in est1_samples:
            parent, _ = builder.tree(q_id)
            lhs = 0.0
            for p_id, p in enumerate(dec.cubes):
                if p.side > t:
                    continue
                ids = builder.path(p_id, q_id)
                if ids is None or ref not in ids:
                    continue
                lhs += (p.measure * long_distance(w, p) ** (k - 1)
                        / long_distance(p, r_box) ** (d + k))
            eps = fit_eps if fit_eps is not None else 1.0
            bound = (w.measure * w.side ** (k - 1)
                     * min(1.0, t / w.side) ** eps
                     / long_distance(r_box, w) ** (d + k))
            est1.append({"q": q_id, "t": t, "k": k, "lhs": lhs,
                         "bound": bound, "const": lhs / bound if bound else math.inf})
    return {"counts": counts, "eps": fit_eps, "est2": est2, "est1": est1}


@dataclass
class WindowSystem:
    dec: WhitneyDecomposition
    dil: float
    r0: float
    r1: float
    L: float
    C: float
    D: float
    roots: list                      # ids of the W_j
    companions: list                 # ids of the W_j*
    sh: list                         # per window: sorted id list of SH(W_j)
    sh1: list                        # per window: sorted id list of SH_1(W_j*)
    parent: list                     # per window: {id: next id toward W_j*}
    central: list                    # ids of W_0 (cubes in no shadow)
    stats: dict = field(default_factory=dict)

    @property
    def n_windows(self):
        return len(self.roots)

    def boundary_ids(self):
        out = set()
        for s in self.sh:
            out.update(s)
        return sorted(out)

    def realization(self, ids):
        return [self.dec.cubes[i].dilate(self.dil) for i in ids]

    def chain_to_companion(self, j: int, i: int):
        """Ids along the tree chain [i, W_j*] inside window j."""
        out = [i]
        par = self.parent[j]
        while out[-1] != self.companions[j]:
            out.append(par[out[-1]])
        return out

    def below(self, j: int, w: int):
        """Ordered shadow SH_0(w) in window j: tree descendants of w."""
        kids = {}
        for a, b in self.parent[j].items():
            kids.setdefault(b, []).append(a)
        out, stack = [], [w]
        while stack:
            u = stack.pop()
            out.append(u)
            stack.extend(kids.get(u, []))
        return sorted(out)

    def sh0_boxes(self, j: int, w: int):
        return self.realization(self.below(j, w))

    def to_json(self) -> str:
        return json.dumps({
            "r0": self.r0, "r1": self.r1, "L": self.L, "C": self.C,
            "D": self.D, "dil": self.dil,
            "roots": self.roots, "companions": self.companions,
            "sh": self.sh, "sh1": self.sh1,
            "parents": [{str(k): v for k, v in p.items()} for p in self.parent],
            "central": self.central,
        }, indent=1, sort_keys=True)


def _oriented_members(builder: ChainBuilder, target: int, L: float, cap: float):
    """Ids P with an oriented admissible chain [P, target] at level L.

    Only cubes with side <= cap are tested (the construction never needs
    larger ones)."""
    dec = builder.dec
    parent, cost = builder.tree(target)
    out = []
    for p_id, p in enumerate(dec.cubes):
        if p.side > cap or (p_id != target and parent[p_id] < 0):
            continue
        ids = builder.path(p_id, target)
        cubes = [dec.cubes[i] for i in ids]
        dqw = long_distance(cubes[0], cubes[-1])
        if sum(c.side for c in cubes) > L * dqw:
            continue
        if all(long_distance(cubes[0], c) <= L * c.side for c in cubes):
            out.append(p_id)
    return out


def build_windows(dec: WhitneyDecomposition, w0: int, dil: float = None,
                  builder: ChainBuilder = None, slack: float = 1.0) -> WindowSystem:
    """Boundary windows rooted below the scale of cube ``w0``.

    Measures C (touching side ratio), D (size comparability under the
    dilate-intersection used by the separation property) and L (certified
    over the chains to w0), sets r1 = slack * r0/(C*D*L), takes the roots
    at scale r1 and companions at scale r0, and verifies (S1)-(S4) by
    enumeration before returning.
    """
    builder = builder or ChainBuilder(dec)
    cubes = dec.cubes
    dil = dil if dil is not None else max(1.0, dec.sep / 16.0)
    r0 = cubes[w0].side
    C = max(2.0, dec.w3_ratio)

    # L: certified over minimal chains from every cube of side <= r0 to w0
    L = 1.0
    for p_id, p in enumerate(cubes):
        if p.side <= r0:
            ids = builder.path(p_id, w0)
            if ids is None:
                continue
            L = max(L, builder.chain(p_id, w0).certify())

    # D: size ratio forced by intersection of the separation dilates
    D = 1.0
    boxes4 = [c.dilate(4.0 * dil) for c in cubes]
    boxes2 = [c.dilate(2.0 * dil) for c in cubes]
    lo4 = np.array([b[0] for b in boxes4]); hi4 = np.array([b[1] for b in boxes4])
    lo2 = np.array([b[0] for b in boxes2]); hi2 = np.array([b[1] for b in boxes2])
    sides = np.array([c.side for c in cubes])
    for i, c in enumerate(cubes):
        meet = np.all((hi2 >= lo4[i]) & (lo2 <= hi4[i]), axis=1)
        if np.any(meet):
            D = max(D, float(c.side / sides[meet].min()))

    r1 = slack * r0 / (C * D * L)
    lv = lambda r: (L ** -1 * r, C * r / L)
    e_r1 = [i for i, c in enumerate(cubes) if lv(r1)[0] < c.side <= lv(r1)[1]]
    e_r0 = [i for i, c in enumerate(cubes) if lv(r0)[0] < c.side <= lv(r0)[1]]
    if not e_r1:
        raise GeometryError(
            f"no cubes at the root scale r1={r1:.3g} (L={L:.3g}, C={C:.3g}, "
            f"D={D:.3g}); refine max_level or enlarge sep", witness=(r0, r1))

    roots = sorted(e_r1)
    sh, sh1, companions, parents, sh_comp = [], [], [], [], []
    for j, wj in enumerate(roots):
        members = _oriented_members(builder, wj, L, cubes[wj].side)
        sh.append(sorted(members))
        # companion: a cube of scale ~ r0 on the chain [wj, w0] whose shadow
        # contains wj
        comp = None
        ids = builder.path(wj, w0)
        if ids is not None:
            for i in ids:
                if lv(r0)[0] < cubes[i].side <= lv(r0)[1]:
                    comp = i
                    break
        if comp is None:
            comp = w0
        companions.append(comp)
        tree_parent, _ = builder.tree(comp)
        members1 = set()
        sh_comp.append(sorted(_oriented_members(builder, comp, L, cubes[comp].side)))
        for q in sh_comp[-1]:
            ids_q = builder.path(q, comp)
            members1.update(ids_q)
        sh1.append(sorted(members1))
        parents.append({i: int(tree_parent[i]) for i in members1 if i != comp})

    in_shadow = set()
    for s in sh:
        in_shadow.update(s)
    central = [i for i in range(len(cubes)) if i not in in_shadow]

    ws = WindowSystem(dec, dil, r0, r1, L, C, D, roots, companions,
                      sh, sh1, parents, central)
    _verify_windows(ws, sh_comp)
    return ws


def _verify_windows(ws: WindowSystem, sh_comp):
    cubes = ws.dec.cubes
    # (S1) root scales comparable to r1
    s1 = [cubes[i].side / ws.r1 for i in ws.roots]
    # (S2) anything outside all shadows is coarse
    small = [i for i in ws.central if cubes[i].side <= ws.r1 / ws.L]
    if small:
        raise GeometryError("(S2) failed: fine cube outside all shadows",
                            witness=small[:4])
    # (S3) separation of the companion dilate from the shadow realization
    for j, (wj, comp) in enumerate(zip(ws.roots, ws.companions)):
        if wj not in ws.sh1[j]:
            raise GeometryError("(S3) companion shadow misses its root",
                                witness=(wj, comp))
        blo, bhi = cubes[comp].dilate(4.0 * ws.dil)
        for i in ws.sh[j]:
            plo, phi = cubes[i].dilate(ws.dil)
            if np.all(phi >= blo) and np.all(bhi >= plo):
                raise GeometryError("(S3) separation failed; enlarge sep",
                                    witness=(comp, i))
    # (S4) overlap counts of the three families (sampled union stabbing)
    over = {}
    for name, fam in (("sh", ws.sh), ("sh_comp", sh_comp), ("sh1", ws.sh1)):
        over[name] = _max_union_overlap([ws.realization(ids) for ids in fam if ids])
    ws.stats = {"s1_ratios": (min(s1), max(s1)) if s1 else (0, 0),
                "overlap": over}


def _max_union_overlap(unions, n=2048, rng=None):
    if not unions:
        return 0
    rng = rng or np.random.default_rng(1)
    allb = [b for u in unions for b in u]
    lo = np.min([b[0] for b in allb], axis=0)
    hi = np.max([b[1] for b in allb], axis=0)
    pts = rng.uniform(lo, hi, size=(n, len(lo)))
    counts = np.zeros(n, dtype=np.int64)
    for u in unions:
        blo = np.array([b[0] for b in u])
        bhi = np.array([b[1] for b in u])
        inside = np.all((pts[:, None, :] >= blo[None]) & (pts[:, None, :] <= bhi[None]),
                        axis=2).any(axis=1)
        counts += inside
    return int(counts.max())


def ordered_shadow(w: int, ws: WindowSystem, j: int = None):
    """SH_0(w): members of window j at or below w in the chain order.

    Certifies reflexivity and transitivity by direct chain containment on
    the returned set."""
    js = [j] if j is not None else [t for t in range(ws.n_windows)
                                    if w in ws.sh1[t]]
    if not js:
        raise GeometryError("cube lies in no window", witness=w)
    j = js[0]
    out = ws.below(j, w)
    for p in out:
        chain_p = ws.chain_to_companion(j, p)
        if w not in chain_p:
            raise GeometryError("order not certified: containment fails",
                                witness=(p, w))
    return out


def shadow_measure(ws: WindowSystem, ids, probe_box=None) -> float:
    boxes = ws.realization(ids)
    if probe_box is None:
        lo = np.min([b[0] for b in boxes], axis=0)
        hi = np.max([b[1] for b in boxes], axis=0)
        probe_box = (lo, hi)
    return box_in_union_measure(probe_box, boxes)

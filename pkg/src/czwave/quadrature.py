"""Gauss-Legendre rules on boxes, polar rules around a point, graded helpers."""

from __future__ import annotations

import functools
import math

import numpy as np

from .grid import box_intersection


@functools.lru_cache(maxsize=None)
def gauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def gauss_on(a: float, b: float, n: int):
    x, w = gauss(n)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * x, half * w


def tensor_rule(box, n: int):
    """Tensor Gauss rule on a box; returns (pts (N,d), wts (N,))."""
    lo, hi = (np.asarray(v, float) for v in box)
    d = len(lo)
    axes = [gauss_on(lo[i], hi[i], n) for i in range(d)]
    if d == 1:
        return axes[0][0][:, None], axes[0][1]
    X = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    W = np.meshgrid(*[a[1] for a in axes], indexing="ij")
    pts = np.stack([x.ravel() for x in X], axis=1)
    wts = np.prod(np.stack([w.ravel() for w in W], axis=1), axis=1)
    return pts, wts


def graded_intervals(a: float, b: float, toward: float, levels: int):
    """Dyadic subdivision of [a,b] refined toward endpoint ``toward``."""
    if toward <= a:
        edges = [a] + [a + (b - a) * 2.0 ** (-m) for m in range(levels - 1, 0, -1)] + [b]
    else:
        edges = [a] + [b - (b - a) * 2.0 ** (-m) for m in range(1, levels)] + [b]
        edges = sorted(set(edges))
    return [(edges[i], edges[i + 1]) for i in range(len(edges) - 1)]


def graded_rule_1d(a: float, b: float, toward: float, levels: int, n: int):
    xs, ws = [], []
    for lo, hi in graded_intervals(a, b, toward, levels):
        x, w = gauss_on(lo, hi, n)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def ratio_graded_rule_1d(a: float, b: float, n: int, ratio: float = 2.0):
    """Composite Gauss on [a,b] (0<a<b) with panels of bounded ratio."""
    panels = max(1, int(math.ceil(math.log(b / a) / math.log(ratio))))
    edges = a * (b / a) ** (np.arange(panels + 1) / panels)
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        x, w = gauss_on(lo, hi, n)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def ray_box_interval(x, e, box):
    """Intersection {t >= 0 : x + t e in box} as (t0, t1), or None."""
    lo, hi = (np.asarray(v, float) for v in box)
    t0, t1 = 0.0, math.inf
    for i in range(len(lo)):
        if abs(e[i]) < 1e-300:
            if not (lo[i] <= x[i] <= hi[i]):
                return None
            continue
        ta, tb = (lo[i] - x[i]) / e[i], (hi[i] - x[i]) / e[i]
        if ta > tb:
            ta, tb = tb, ta
        t0, t1 = max(t0, ta), min(t1, tb)
    if t1 <= t0 + 1e-300:
        return None
    return t0, t1


def _theta_panels(x, box):
    lo, hi = (np.asarray(v, float) for v in box)
    corners = np.array([[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]])
    ang = np.sort(np.mod(np.arctan2(corners[:, 1] - x[1], corners[:, 0] - x[0]), 2 * math.pi))
    panels = []
    for i in range(4):
        a = ang[i]
        b = ang[(i + 1) % 4] if i < 3 else ang[0] + 2 * math.pi
        if b - a > 1e-14:
            panels.append((a, b))
    return panels


def polar_rule(x, box, n_theta: int = 10, n_r: int = 10, r_ratio: float = 2.0,
               inner_grade: int = 0):
    """Polar rule around x covering the box, area weights folded.

    Returns dict with pts (N,d), w (N,) including the r^(d-1) Jacobian,
    r (N,), e (N,d) unit directions.  Panels split at corner directions so
    the integrand is smooth per panel.  With inner_grade > 0, panels whose
    inner radius is 0 are refined dyadically toward r=0 (for integrands that
    are merely continuous there).
    """
    x = np.asarray(x, float)
    d = len(x)
    pts, wts, rs, es = [], [], [], []
    if d == 1:
        dirs = [np.array([1.0]), np.array([-1.0])]
        for e in dirs:
            iv = ray_box_interval(x, e, box)
            if iv is None:
                continue
            r0, r1 = iv
            segs = _r_segments(r0, r1, r_ratio, inner_grade)
            for a, b in segs:
                r, w = gauss_on(a, b, n_r)
                pts.append(x[None, :] + r[:, None] * e[None, :])
                wts.append(w)
                rs.append(r)
                es.append(np.repeat(e[None, :], len(r), 0))
    else:
        for a, b in _theta_panels(x, box):
            tn, tw = gauss_on(a, b, n_theta)
            for th, w_t in zip(tn, tw):
                e = np.array([math.cos(th), math.sin(th)])
                iv = ray_box_interval(x, e, box)
                if iv is None:
                    continue
                r0, r1 = iv
                for sa, sb in _r_segments(r0, r1, r_ratio, inner_grade):
                    r, w_r = gauss_on(sa, sb, n_r)
                    pts.append(x[None, :] + r[:, None] * e[None, :])
                    wts.append(w_t * w_r * r)
                    rs.append(r)
                    es.append(np.repeat(e[None, :], len(r), 0))
    if not pts:
        return {"pts": np.zeros((0, d)), "w": np.zeros(0), "r": np.zeros(0),
                "e": np.zeros((0, d))}
    return {"pts": np.concatenate(pts), "w": np.concatenate(wts),
            "r": np.concatenate(rs), "e": np.concatenate(es)}


def _r_segments(r0, r1, ratio, inner_grade):
    if r0 <= 0.0:
        if inner_grade <= 0:
            return [(0.0, r1)]
        segs, hi = [], r1
        for _ in range(inner_grade):
            segs.append((hi / 2, hi))
            hi = hi / 2
        segs.append((0.0, hi))
        return segs[::-1]
    panels = max(1, int(math.ceil(math.log(r1 / r0) / math.log(ratio))))
    edges = r0 * (r1 / r0) ** (np.arange(panels + 1) / panels)
    return list(zip(edges[:-1], edges[1:]))


def shell_boxes(core, grow: float = 2.0):
    """Generator of box lists tiling successive annuli around a core box.

    Ring m tiles dilate(core, grow^(m+1)) minus dilate(core, grow^m),
    split into axis slabs (exact, disjoint).
    """
    lo, hi = (np.asarray(v, float) for v in core)
    c = 0.5 * (lo + hi)
    h = 0.5 * (hi - lo)
    m = 0
    while True:
        a = grow ** m
        b = grow ** (m + 1)
        inner = (c - a * h, c + a * h)
        outer = (c - b * h, c + b * h)
        yield annulus_boxes(inner, outer)
        m += 1


def annulus_boxes(inner, outer):
    """Disjoint boxes tiling outer minus inner (inner inside outer)."""
    ilo, ihi = (np.asarray(v, float) for v in inner)
    olo, ohi = (np.asarray(v, float) for v in outer)
    d = len(ilo)
    if d == 1:
        return [(olo.copy(), ilo.copy()), (ihi.copy(), ohi.copy())]
    boxes = [
        (np.array([olo[0], olo[1]]), np.array([ohi[0], ilo[1]])),
        (np.array([olo[0], ihi[1]]), np.array([ohi[0], ohi[1]])),
        (np.array([olo[0], ilo[1]]), np.array([ilo[0], ihi[1]])),
        (np.array([ihi[0], ilo[1]]), np.array([ohi[0], ihi[1]])),
    ]
    return [b for b in boxes if np.all(b[1] > b[0] + 1e-300)]


def split_box_for_rule(box, max_side):
    """Split a box into subboxes with sides <= max_side (uniform grid)."""
    lo, hi = (np.asarray(v, float) for v in box)
    counts = [max(1, int(math.ceil((hi[i] - lo[i]) / max_side))) for i in range(len(lo))]
    edges = [np.linspace(lo[i], hi[i], counts[i] + 1) for i in range(len(lo))]
    out = []
    if len(lo) == 1:
        for i in range(counts[0]):
            out.append((np.array([edges[0][i]]), np.array([edges[0][i + 1]])))
        return out
    for i in range(counts[0]):
        for j in range(counts[1]):
            out.append((np.array([edges[0][i], edges[1][j]]),
                        np.array([edges[0][i + 1], edges[1][j + 1]])))
    return out


def clip_boxes(boxes, clip):
    out = []
    for b in boxes:
        it = box_intersection(b, clip)
        if it is not None:
            out.append(it)
    return out

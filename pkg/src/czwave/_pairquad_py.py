"""Pure numpy fallback for the compiled pair-contraction kernels.

Same contracts as ``_pairquad``.  Pairs are processed in chunks grouped by
(node-count, node-count) class so the inner contraction is a vectorized
broadcast instead of a Python loop per pair.
"""

import numpy as np

_CHUNK = 1 << 18  # cap on nodes*nodes*pairs elements per broadcast


def _ipow_inv(dz, n):
    inv = 1.0 / dz
    out = inv.copy()
    for _ in range(n - 1):
        out *= inv
    return out


def _grouped(px, py, ia, ib):
    nx = px[ia + 1] - px[ia]
    ny = py[ib + 1] - py[ib]
    key = nx * 100000 + ny
    order = np.argsort(key, kind="stable")
    ks = key[order]
    cuts = np.flatnonzero(np.diff(ks)) + 1
    for blk in np.split(order, cuts):
        yield blk, int(nx[blk[0]]), int(ny[blk[0]])


def _pair_values(zx, wx, px, zy, wy, py, ia, ib, n):
    out = np.zeros(len(ia), dtype=np.complex128)
    if len(ia) == 0:
        return out
    for blk, cnx, cny in _grouped(px, py, ia, ib):
        step = max(1, _CHUNK // max(1, cnx * cny))
        for s in range(0, len(blk), step):
            sel = blk[s : s + step]
            ax = px[ia[sel]][:, None] + np.arange(cnx)[None, :]
            by = py[ib[sel]][:, None] + np.arange(cny)[None, :]
            dz = zx[ax][:, :, None] - zy[by][:, None, :]
            ker = _ipow_inv(dz, n)
            out[sel] = np.einsum("pa,pab,pb->p", wx[ax], ker, wy[by])
    return out


def pair_sum(zx, wx, px, zy, wy, py, ia, ib, n):
    return complex(_pair_values(zx, wx, px, zy, wy, py, ia, ib, n).sum())


def pair_each(zx, wx, px, zy, wy, py, ia, ib, n):
    return _pair_values(zx, wx, px, zy, wy, py, ia, ib, n)


def eval_sum(ztgt, zsrc, wsrc, n):
    out = np.zeros(len(ztgt), dtype=np.complex128)
    step = max(1, _CHUNK // max(1, len(zsrc)))
    for s in range(0, len(ztgt), step):
        dz = ztgt[s : s + step][:, None] - zsrc[None, :]
        out[s : s + step] = _ipow_inv(dz, n) @ wsrc
    return out

"""Polynomial frames on boxes: orthonormal tensor Legendre bases.

A frame fixes a box and the list of multi-indices of total degree <= deg;
its basis functions are products of per-axis scaled Legendre polynomials,
orthonormal in L2 of the box.  Coefficient vectors against a frame are the
working representation of every polynomial in the package; transforms to
the translated-monomial basis (x-c)^beta are exact (small triangular
matrices), as are derivatives and restrictions to subboxes.
"""

from __future__ import annotations

import functools
import math

import numpy as np

from .quadrature import gauss_on


def multi_indices(d: int, max_deg: int):
    """Multi-indices |beta| <= max_deg in graded lexicographic order."""
    out = []
    for total in range(max_deg + 1):
        if d == 1:
            out.append((total,))
            continue
        for first in range(total, -1, -1):
            for rest in multi_indices(d - 1, total - first):
                if sum(rest) == total - first:
                    out.append((first,) + rest)
    return out


def n_polys(d: int, max_deg: int) -> int:
    return math.comb(max_deg + d, d)


@functools.lru_cache(maxsize=None)
def _leg_coeff_table(nmax: int):
    """tab[n, j]: coefficient of u^j in the orthonormal Legendre P-bar_n."""
    tab = np.zeros((nmax + 1, nmax + 1))
    for n in range(nmax + 1):
        c = np.zeros(n + 1)
        c[n] = 1.0
        mono = np.polynomial.legendre.leg2poly(c)
        tab[n, : n + 1] = mono * math.sqrt((2 * n + 1) / 2.0)
    return tab


def _legendre_values(u, nmax: int):
    """Orthonormal Legendre values, shape (len(u), nmax+1)."""
    u = np.asarray(u, float)
    out = np.empty(u.shape + (nmax + 1,))
    out[..., 0] = 1.0
    if nmax >= 1:
        out[..., 1] = u
    for n in range(1, nmax):
        out[..., n + 1] = ((2 * n + 1) * u * out[..., n] - n * out[..., n - 1]) / (n + 1)
    for n in range(nmax + 1):
        out[..., n] *= math.sqrt((2 * n + 1) / 2.0)
    return out


class PolyFrame:
    """Orthonormal polynomial basis of total degree <= deg on a box."""

    def __init__(self, box, deg: int):
        lo, hi = (np.asarray(v, float) for v in box)
        self.lo, self.hi = lo, hi
        self.d = len(lo)
        self.deg = deg
        self.center = 0.5 * (lo + hi)
        self.sides = hi - lo
        self.mi = multi_indices(self.d, deg)
        self.nb = len(self.mi)
        self._minp = np.array(self.mi, dtype=int)

    @property
    def box(self):
        return self.lo, self.hi

    def eval_basis(self, pts):
        pts = np.atleast_2d(np.asarray(pts, float))
        vals = np.ones((len(pts), self.nb))
        per_axis = []
        for i in range(self.d):
            u = 2.0 * (pts[:, i] - self.center[i]) / self.sides[i]
            per_axis.append(_legendre_values(u, self.deg) * math.sqrt(2.0 / self.sides[i]))
        for b, beta in enumerate(self.mi):
            for i in range(self.d):
                vals[:, b] *= per_axis[i][:, beta[i]]
        return vals

    def project_values(self, pts, wts, vals):
        """Coefficients of the L2 projection from a quadrature sample."""
        return self.eval_basis(pts).T @ (wts * vals)

    def project_callable(self, f, n: int = None):
        from .quadrature import tensor_rule

        n = n or (self.deg + 2)
        pts, wts = tensor_rule(self.box, n)
        return self.project_values(pts, wts, np.asarray(f(pts), float))

    def mono_matrix(self):
        """M with basis_b(x) = sum_beta M[b, beta] (x-center)^beta."""
        tab = _leg_coeff_table(self.deg)
        M = np.zeros((self.nb, self.nb))
        idx = {beta: t for t, beta in enumerate(self.mi)}
        for b, beta in enumerate(self.mi):
            per = []
            for i in range(self.d):
                s = 2.0 / self.sides[i]
                row = tab[beta[i], : self.deg + 1] * (s ** np.arange(self.deg + 1))
                per.append(row * math.sqrt(s))
            for t, gamma in enumerate(self.mi):
                c = 1.0
                for i in range(self.d):
                    c *= per[i][gamma[i]]
                if c != 0.0:
                    M[b, t] = c
        return M, idx


def eval_monomials(center, mi, pts):
    pts = np.atleast_2d(np.asarray(pts, float))
    center = np.asarray(center, float)
    out = np.ones((len(pts), len(mi)))
    for t, beta in enumerate(mi):
        for i, b in enumerate(beta):
            if b:
                out[:, t] *= (pts[:, i] - center[i]) ** b
    return out


class Poly:
    """Polynomial as coefficients over a PolyFrame."""

    def __init__(self, frame: PolyFrame, coeffs):
        self.frame = frame
        self.coeffs = np.asarray(coeffs, float)

    def __call__(self, pts):
        return self.frame.eval_basis(pts) @ self.coeffs

    def __add__(self, other):
        assert self.frame is other.frame
        return Poly(self.frame, self.coeffs + other.coeffs)

    def __sub__(self, other):
        assert self.frame is other.frame
        return Poly(self.frame, self.coeffs - other.coeffs)

    def __rmul__(self, a: float):
        return Poly(self.frame, a * self.coeffs)

    def to_monomial(self, center=None):
        """Coefficients c_beta with P(x) = sum c_beta (x-center)^beta."""
        M, _ = self.frame.mono_matrix()
        c = self.coeffs @ M
        if center is None or np.allclose(center, self.frame.center):
            return dict(zip(self.frame.mi, c))
        return _shift_monomial(dict(zip(self.frame.mi, c)), self.frame.center, center)

    def derivative(self, alpha):
        mono = self.to_monomial()
        out = {}
        for beta, c in mono.items():
            nb = tuple(b - a for b, a in zip(beta, alpha))
            if any(v < 0 for v in nb):
                continue
            fac = 1.0
            for b, a in zip(beta, alpha):
                fac *= math.factorial(b) / math.factorial(b - a)
            out[nb] = out.get(nb, 0.0) + c * fac
        return poly_from_monomial(self.frame, out)

    def integral(self) -> float:
        vol = float(np.prod(self.frame.sides))
        return float(self.coeffs[0]) * math.sqrt(vol)


def poly_from_monomial(frame: PolyFrame, mono: dict, center=None) -> Poly:
    if center is not None and not np.allclose(center, frame.center):
        mono = _shift_monomial(mono, center, frame.center)
    M, idx = frame.mono_matrix()
    rhs = np.zeros(frame.nb)
    for beta, c in mono.items():
        if beta in idx:
            rhs[idx[beta]] = c
        elif c != 0.0:
            raise ValueError("monomial degree exceeds frame degree")
    return Poly(frame, np.linalg.solve(M.T, rhs))


def _shift_monomial(mono: dict, old_center, new_center) -> dict:
    """Re-center sum c_beta (x-old)^beta as coefficients around new."""
    old = np.asarray(old_center, float)
    new = np.asarray(new_center, float)
    h = new - old
    out = {}
    for beta, c in mono.items():
        axes = []
        for i, b in enumerate(beta):
            row = [(j, math.comb(b, j) * h[i] ** (b - j)) for j in range(b + 1)]
            axes.append(row)
        combos = [((), 1.0)]
        for row in axes:
            combos = [(idx + (j,), f * g) for idx, f in combos for j, g in row]
        for idx, f in combos:
            out[idx] = out.get(idx, 0.0) + c * f
    return out


def restrict_poly(p: Poly, subframe: PolyFrame) -> Poly:
    """Exact re-expansion of p on a subbox frame (degree preserved)."""
    pts, wts = _frame_rule(subframe)
    return Poly(subframe, subframe.project_values(pts, wts, p(pts)))


@functools.lru_cache(maxsize=None)
def _cached_rule_shape(d, deg):
    return deg + 2


def _frame_rule(frame: PolyFrame):
    from .quadrature import tensor_rule

    return tensor_rule(frame.box, frame.deg + 2)

# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Hot quadrature kernels: power-law pair contractions over cell node sets.

Cells are stored CSR-style: node coordinates (as complex numbers, x1+i*x2 in
2D, x+0i in 1D) plus folded weights (quadrature weight times the field value
at the node).  A form value is the sum over requested cell pairs (i, j) of

    sum_{a in cell_i} sum_{b in cell_j} wx[a] * wy[b] * (zx[a]-zy[b])**(-n)

The kernel power n is a small positive integer, so the complex power is
computed by repeated multiplication.
"""

import numpy as np

cimport numpy as cnp


cdef inline double complex ipow_inv(double complex dz, int n) nogil:
    cdef double complex inv = 1.0 / dz
    cdef double complex out = inv
    cdef int t
    for t in range(n - 1):
        out = out * inv
    return out


def pair_sum(cnp.complex128_t[::1] zx, cnp.float64_t[::1] wx, cnp.int64_t[::1] px,
             cnp.complex128_t[::1] zy, cnp.float64_t[::1] wy, cnp.int64_t[::1] py,
             cnp.int64_t[::1] ia, cnp.int64_t[::1] ib, int n):
    """Total contraction over the pair list; returns a complex scalar."""
    cdef double complex S = 0.0
    cdef double complex acc, za
    cdef double wa
    cdef Py_ssize_t t, a, b, i, j
    with nogil:
        for t in range(ia.shape[0]):
            i = ia[t]
            j = ib[t]
            for a in range(px[i], px[i + 1]):
                za = zx[a]
                wa = wx[a]
                acc = 0.0
                for b in range(py[j], py[j + 1]):
                    acc = acc + wy[b] * ipow_inv(za - zy[b], n)
                S = S + wa * acc
    return complex(S)


def pair_each(cnp.complex128_t[::1] zx, cnp.float64_t[::1] wx, cnp.int64_t[::1] px,
              cnp.complex128_t[::1] zy, cnp.float64_t[::1] wy, cnp.int64_t[::1] py,
              cnp.int64_t[::1] ia, cnp.int64_t[::1] ib, int n):
    """Per-pair contraction values (complex array, one entry per pair)."""
    out = np.empty(ia.shape[0], dtype=np.complex128)
    cdef cnp.complex128_t[::1] ov = out
    cdef double complex S, acc, za
    cdef double wa
    cdef Py_ssize_t t, a, b, i, j
    with nogil:
        for t in range(ia.shape[0]):
            i = ia[t]
            j = ib[t]
            S = 0.0
            for a in range(px[i], px[i + 1]):
                za = zx[a]
                wa = wx[a]
                acc = 0.0
                for b in range(py[j], py[j + 1]):
                    acc = acc + wy[b] * ipow_inv(za - zy[b], n)
                S = S + wa * acc
            ov[t] = S
    return out


def eval_sum(cnp.complex128_t[::1] ztgt, cnp.complex128_t[::1] zsrc,
             cnp.float64_t[::1] wsrc, int n):
    """K-potential of a weighted source cloud at target points.

    Returns array V with V[t] = sum_b wsrc[b] * (ztgt[t]-zsrc[b])**(-n).
    """
    out = np.empty(ztgt.shape[0], dtype=np.complex128)
    cdef cnp.complex128_t[::1] ov = out
    cdef double complex acc, zt
    cdef Py_ssize_t t, b
    with nogil:
        for t in range(ztgt.shape[0]):
            zt = ztgt[t]
            acc = 0.0
            for b in range(zsrc.shape[0]):
                acc = acc + wsrc[b] * ipow_inv(zt - zsrc[b], n)
            ov[t] = acc
    return out

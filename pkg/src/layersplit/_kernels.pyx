# cython: language_level=3
"""Compiled inner loops.

Every function here has a NumPy twin in ``_kernels_py`` with the same
signature and the same floating-point operation order.
"""
import numpy as np

from libc.math cimport fabs, fmax, copysign


cdef inline double _soft(double z, double w) noexcept nogil:
    cdef double r = fabs(z) - w
    if r <= 0.0:
        return 0.0
    return copysign(r, z)


def shrink(const double[::1] a, const double[::1] w):
    cdef Py_ssize_t i, n = a.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = _soft(a[i], w[i])
    return out


cdef inline void _axpy(double t, const double* x, double* out, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i
    for i in range(n):
        out[i] += t * x[i]


def circ_filter(const double[:, :, ::1] x, const double[::1] taps, Py_ssize_t anchor,
                bint adjoint, double[:, :, ::1] out, bint accumulate):
    """Circular correlation of every middle-axis fiber of ``x`` with ``taps``.

    Forward: out[o, i, n] = sum_k taps[k] * x[o, (i + k - anchor) % D, n]
    Adjoint: out[o, i, n] = sum_k taps[k] * x[o, (i - k + anchor) % D, n]

    For a fixed tap the source is the block shifted by ``s`` rows, which is
    two contiguous runs of the flattened ``(D, inner)`` slab.
    """
    cdef Py_ssize_t n_outer = x.shape[0], d = x.shape[1], n_inner = x.shape[2]
    cdef Py_ssize_t n_taps = taps.shape[0], slab = d * n_inner
    cdef Py_ssize_t o, k, s, head, i
    cdef double t
    cdef const double* xs
    cdef double* os
    if slab == 0:
        return
    with nogil:
        for o in range(n_outer):
            xs = &x[o, 0, 0]
            os = &out[o, 0, 0]
            if not accumulate:
                for i in range(slab):
                    os[i] = 0.0
            for k in range(n_taps):
                t = taps[k]
                s = (anchor - k) if adjoint else (k - anchor)
                s = ((s % d) + d) % d
                head = (d - s) * n_inner
                # rows [0, d - s) read rows [s, d); rows [d - s, d) read rows [0, s)
                _axpy(t, xs + s * n_inner, os, head)
                _axpy(t, xs, os + head, slab - head)


def uv_step(const double[::1] g, double[::1] u, double[::1] v,
            double[::1] y1, double[::1] y2,
            const double[::1] fli, const double[::1] fla,
            double alpha, double beta, double gamma, double mu, double tden):
    """Fused u/v shrinkage and y1/y2 ascent, in place.

    Returns the squared norms of (u - F l_I) and (v - F l_A).
    """
    cdef Py_ssize_t i, n = g.shape[0]
    cdef double den = 2.0 * gamma + mu
    cdef double two_gamma = 2.0 * gamma
    cdef double zu, zv, un, vn, du, dv
    cdef double su = 0.0, sv = 0.0
    with nogil:
        for i in range(n):
            zu = (two_gamma * (g[i] - v[i]) + mu * fli[i] - y1[i]) / den
            un = _soft(zu, (alpha + beta * fabs(v[i])) / tden)
            zv = (two_gamma * (g[i] - un) + mu * fla[i] - y2[i]) / den
            vn = _soft(zv, (beta * fabs(un)) / tden)
            du = un - fli[i]
            dv = vn - fla[i]
            y1[i] = y1[i] + mu * du
            y2[i] = y2[i] + mu * dv
            u[i] = un
            v[i] = vn
            su += du * du
            sv += dv * dv
    return su, sv

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_pykernels``.

Array arguments are float64 buffers (numpy arrays); ``kernels`` takes care
of the conversion.
"""

import numpy as np
from libc.math cimport fabs, INFINITY


def pack_bits(values, widths):
    cdef unsigned long long word = 0
    cdef long long v
    cdef int w
    cdef int total = 0
    for v_obj, w in zip(values, widths):
        v = v_obj
        total += w
        if v < 0 or (v >> w) != 0:
            raise OverflowError(f"value {v} does not fit in {w} bits")
        word = (word << w) | <unsigned long long>v
    if total > 64:
        raise OverflowError("more than 64 bits requested")
    return word


def unpack_bits(word, widths):
    cdef unsigned long long wd = word
    cdef int shift = 0
    cdef int w
    for w in widths:
        shift += w
    if shift > 64:
        raise OverflowError("more than 64 bits requested")
    out = []
    for w in widths:
        shift -= w
        out.append(<long long>((wd >> shift) & ((1ULL << w) - 1)))
    return out


def akima_node_slopes(const double[::1] x, const double[::1] y):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i
    cdef double w_left, w_right, denom
    m_arr = np.empty(n + 3, dtype=np.float64)
    t_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] m = m_arr
    cdef double[::1] t = t_arr
    for i in range(n - 1):
        m[i + 2] = (y[i + 1] - y[i]) / (x[i + 1] - x[i])
    if n == 2:
        m[0] = m[2]
        m[1] = m[2]
        m[3] = m[2]
        m[4] = m[2]
    else:
        m[1] = 2.0 * m[2] - m[3]
        m[0] = 2.0 * m[1] - m[2]
        m[n + 1] = 2.0 * m[n] - m[n - 1]
        m[n + 2] = 2.0 * m[n + 1] - m[n]
    for i in range(n):
        w_left = fabs(m[i + 3] - m[i + 2])
        w_right = fabs(m[i + 1] - m[i])
        denom = w_left + w_right
        if denom == 0.0:
            t[i] = 0.5 * (m[i + 1] + m[i + 2])
        else:
            t[i] = (w_left * m[i + 1] + w_right * m[i + 2]) / denom
    return t_arr


def hermite_eval(const double[::1] x, const double[::1] y,
                 const double[::1] t, const double[::1] xq):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t nq = xq.shape[0]
    cdef Py_ssize_t k, seg = 0
    cdef double q, h, s, s2, s3
    out_arr = np.empty(nq, dtype=np.float64)
    cdef double[::1] out = out_arr
    for k in range(nq):
        q = xq[k]
        if seg > 0 and q < x[seg]:
            seg = 0
        while seg < n - 2 and q > x[seg + 1]:
            seg += 1
        h = x[seg + 1] - x[seg]
        s = (q - x[seg]) / h
        s2 = s * s
        s3 = s2 * s
        out[k] = ((2.0 * s3 - 3.0 * s2 + 1.0) * y[seg]
                  + (s3 - 2.0 * s2 + s) * h * t[seg]
                  + (-2.0 * s3 + 3.0 * s2) * y[seg + 1]
                  + (s3 - s2) * h * t[seg + 1])
    return out_arr


def trapezoid(const double[::1] values, double dx):
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t i
    cdef double acc = 0.0
    if n < 2:
        return 0.0
    for i in range(1, n - 1):
        acc += values[i]
    return dx * (acc + 0.5 * (values[0] + values[n - 1]))


def lagrangian_argmin(const double[:, ::1] table,
                      const double[::1] coefficients,
                      double lambda_rate, double lambda_energy):
    cdef Py_ssize_t n = table.shape[0]
    cdef Py_ssize_t ntools = coefficients.shape[0]
    cdef Py_ssize_t i, j
    cdef Py_ssize_t best = -1
    cdef double best_j = INFINITY, best_d = INFINITY, best_r = INFINITY
    cdef double energy, d, r, j_cost
    if table.shape[1] != ntools + 2:
        raise ValueError("table rows must hold D, R and one count per tool")
    for i in range(n):
        energy = 0.0
        for j in range(ntools):
            energy += table[i, j + 2] * coefficients[j]
        d = table[i, 0]
        r = table[i, 1]
        j_cost = d + lambda_rate * r + lambda_energy * energy
        if (best < 0 or j_cost < best_j
                or (j_cost == best_j and (d < best_d
                                          or (d == best_d and r < best_r)))):
            best = i
            best_j = j_cost
            best_d = d
            best_r = r
    return best

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the tiling-probability recursion.

All inputs are the branch weights p[n], q[n] for n = 1..N stored at index n
(index 0 unused).  p[1] is the single-hole weight of site 1; for n >= 2, p[n]
is the weight of a hole pair on (n-1, n).
"""

import numpy as np


def density(double[::1] p, double[::1] q):
    """<n_j>_N for j = 1..N by the length recursion, O(N^2)."""
    cdef Py_ssize_t N = p.shape[0] - 1
    cdef Py_ssize_t j, n
    cdef double e2, e1, e0
    out = np.empty(N, dtype=np.float64)
    cdef double[::1] o = out
    for j in range(1, N + 1):
        e2 = 0.0      # <n_j>_{j-1}: site j sits inside a pair
        e1 = q[j]     # <n_j>_j
        for n in range(j + 1, N + 1):
            e0 = p[n] * e2 + q[n] * e1
            e2 = e1
            e1 = e0
        o[j - 1] = e1
    return out


def visits(double[::1] p, double[::1] q, Py_ssize_t start):
    """v[n] = probability that the right-to-left tiling from ``start`` hits boundary n."""
    cdef Py_ssize_t n
    v = np.zeros(start + 1, dtype=np.float64)
    cdef double[::1] w = v
    w[start] = 1.0
    if start >= 1:
        w[start - 1] = q[start]
    for n in range(start - 2, -1, -1):
        w[n] = w[n + 1] * q[n + 1] + w[n + 2] * p[n + 2]
    return v


def pair_particle(double[::1] p, double[::1] q, Py_ssize_t d):
    """P(x_j and x_{j+d}) for j = 1..N-d, O(N d)."""
    cdef Py_ssize_t N = p.shape[0] - 1
    cdef Py_ssize_t j, k, t, s
    cdef double r2, r1, r0
    cdef double[::1] v = visits(p, q, N)
    out = np.empty(max(N - d, 0), dtype=np.float64)
    cdef double[::1] o = out
    for j in range(1, N - d + 1):
        k = j + d
        s = k - 1
        # walk back from boundary s to boundary j
        r2 = 0.0
        r1 = 1.0
        for t in range(s - 1, j - 1, -1):
            r0 = r1 * q[t + 1] + (r2 * p[t + 2] if t + 2 <= s else 0.0)
            r2 = r1
            r1 = r0
        o[j - 1] = v[k] * q[k] * r1 * q[j]
    return out


def hole_count(double[::1] p, double[::1] q):
    """Coefficients of the hole-number generating polynomial, length N+1."""
    cdef Py_ssize_t N = p.shape[0] - 1
    cdef Py_ssize_t n, m
    P = np.zeros((3, N + 1), dtype=np.float64)
    cdef double[:, ::1] c = P
    cdef Py_ssize_t a = 0, b = 1, z
    c[a, 0] = 1.0                  # length 0
    if N == 0:
        return P[a].copy()
    c[b, 0] = q[1]                 # length 1
    c[b, 1] = p[1]
    for n in range(2, N + 1):
        z = 3 - a - b
        for m in range(0, n + 1):
            c[z, m] = q[n] * c[b, m] + (p[n] * c[a, m - 2] if m >= 2 else 0.0)
        a = b
        b = z
    return P[b].copy()

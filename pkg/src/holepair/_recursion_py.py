"""Numpy fallback for the compiled tiling-probability kernels.

Same signatures and conventions as the compiled module: weights indexed
1..N with index 0 unused.
"""

import numpy as np


def density(p, q):
    N = len(p) - 1
    # e1[j-1] = <n_j>_n for all j <= n; e2 the same at length n-1
    e1 = np.zeros(N)
    e2 = np.zeros(N)
    for n in range(1, N + 1):
        e0 = p[n] * e2[:n] + q[n] * e1[:n]
        e0[n - 1] = q[n]
        e2[:n] = e1[:n]
        e2[n - 1] = 0.0
        e1[:n] = e0
    return e1


def visits(p, q, start):
    v = np.zeros(start + 1)
    v[start] = 1.0
    if start >= 1:
        v[start - 1] = q[start]
    for n in range(start - 2, -1, -1):
        v[n] = v[n + 1] * q[n + 1] + v[n + 2] * p[n + 2]
    return v


def pair_particle(p, q, d):
    N = len(p) - 1
    if N - d <= 0:
        return np.zeros(0)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    v = visits(p, q, N)
    j = np.arange(1, N - d + 1)
    s = j + d - 1
    # r[t] = P(hit boundary s - t | start at s), vectorised over j
    r2 = np.zeros(j.size)
    r1 = np.ones(j.size)
    for t in range(1, d):
        b = s - t
        r0 = r1 * q[b + 1] + (r2 * p[b + 2] if t >= 2 else 0.0)
        r2, r1 = r1, r0
    return v[j + d] * q[j + d] * r1 * q[j]


def hole_count(p, q):
    N = len(p) - 1
    prev = np.zeros(N + 1)
    prev[0] = 1.0
    if N == 0:
        return prev
    cur = np.zeros(N + 1)
    cur[0], cur[1] = q[1], p[1]
    for n in range(2, N + 1):
        nxt = q[n] * cur
        nxt[2:] += p[n] * prev[:-2]
        prev, cur = cur, nxt
    return cur

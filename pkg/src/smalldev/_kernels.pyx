# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Same contracts and arithmetic order as ``_purepy``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log1p

cnp.import_array()

cdef enum:
    LOG_PRODUCT_MIN_N = 33


def enumerate_below(values, probs, weights, double threshold, double band, bint prune=True):
    cdef Py_ssize_t n = len(weights)
    cdef Py_ssize_t kmax = 1
    cdef Py_ssize_t k, a
    for k in range(n):
        if len(values[k]) > kmax:
            kmax = len(values[k])

    cdef cnp.ndarray[cnp.float64_t, ndim=2] vals = np.zeros((n, kmax))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ps = np.zeros((n, kmax))
    cdef cnp.ndarray[cnp.intp_t, ndim=1] cnt = np.zeros(n, dtype=np.intp)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.zeros(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] mincomp = np.zeros(n + 1)
    cdef double m
    for k in range(n):
        row_v = values[k]
        row_p = probs[k]
        cnt[k] = len(row_v)
        w[k] = weights[k]
        for a in range(cnt[k]):
            vals[k, a] = row_v[a]
            ps[k, a] = row_p[a]
    for k in range(n - 1, -1, -1):
        m = vals[k, 0]
        for a in range(1, cnt[k]):
            if vals[k, a] < m:
                m = vals[k, a]
        mincomp[k] = mincomp[k + 1] + w[k] * m

    # stack of pending branches; depth-first order matches the Python kernel
    cdef Py_ssize_t cap = n * kmax + 1
    cdef cnp.ndarray[cnp.intp_t, ndim=1] st_k = np.zeros(cap, dtype=np.intp)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] st_s = np.zeros(cap)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] st_p = np.zeros(cap)
    cdef Py_ssize_t top = 0
    cdef double lo = threshold - band
    cdef double hi = threshold + band
    cdef double below = 0.0
    cdef double at = 0.0
    cdef long long enumerated = 0
    cdef long long pruned = 0
    cdef double s, p, s2, rest, wk
    cdef Py_ssize_t depth

    st_k[0] = 0
    st_s[0] = 0.0
    st_p[0] = 1.0
    top = 1
    while top > 0:
        top -= 1
        depth = st_k[top]
        s = st_s[top]
        p = st_p[top]
        if depth == n:
            enumerated += 1
            if s < lo:
                below += p
            elif s <= hi:
                at += p
            continue
        wk = w[depth]
        rest = mincomp[depth + 1]
        for a in range(cnt[depth] - 1, -1, -1):
            s2 = s + wk * vals[depth, a]
            if prune and s2 + rest > hi:
                pruned += 1
                continue
            st_k[top] = depth + 1
            st_s[top] = s2
            st_p[top] = p * ps[depth, a]
            top += 1
    return below, at, enumerated, pruned


def samuels_terms(weights, prefix, double delta):
    cdef Py_ssize_t n = len(weights)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.asarray(weights, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] sig = np.asarray(prefix, dtype=np.float64)
    cdef Py_ssize_t i, j
    cdef double denom, prod, acc
    out = [0.0] * n
    for i in range(n):
        denom = sig[i] + delta
        if n < LOG_PRODUCT_MIN_N:
            prod = 1.0
            for j in range(i + 1):
                prod *= 1.0 - w[j] / denom
            out[i] = prod
        else:
            acc = 0.0
            for j in range(i + 1):
                acc += log1p(-w[j] / denom)
            out[i] = exp(acc)
    return out

# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend.

The Gibbs sweeps mirror ``_py`` operation-for-operation in IEEE double
precision, so both backends draw identical chains from the same uniform
stream. K-Means shares the iteration structure (assign, repair, update,
converge) with ``_py``.
"""

from libc.math cimport INFINITY, sqrt

import numpy as np

cimport numpy as cnp

cnp.import_array()

name = "cython"


def lda_sweep(doc_of, word_of, z, n_dz, n_zw, n_z, double alpha, double beta,
              uniforms):
    cdef cnp.int32_t[::1] doc_v = doc_of
    cdef cnp.int32_t[::1] word_v = word_of
    cdef cnp.int32_t[::1] z_v = z
    cdef cnp.int32_t[:, ::1] n_dz_v = n_dz
    cdef cnp.int32_t[:, ::1] n_zw_v = n_zw
    cdef cnp.int32_t[::1] n_z_v = n_z
    cdef double[::1] u_v = uniforms
    cdef Py_ssize_t n_tokens = z_v.shape[0]
    cdef Py_ssize_t k = n_zw_v.shape[0]
    cdef Py_ssize_t vocab = n_zw_v.shape[1]
    cdef double vbeta = vocab * beta
    cdef double[::1] buf = np.empty(k, dtype=np.float64)
    cdef Py_ssize_t t, zz
    cdef cnp.int32_t d, w, old, new
    cdef double p, total, thr, acc
    for t in range(n_tokens):
        d = doc_v[t]
        w = word_v[t]
        old = z_v[t]
        n_dz_v[d, old] -= 1
        n_zw_v[old, w] -= 1
        n_z_v[old] -= 1
        total = 0.0
        for zz in range(k):
            p = (n_zw_v[zz, w] + beta) / (n_z_v[zz] + vbeta) * (n_dz_v[d, zz] + alpha)
            buf[zz] = p
            total += p
        if not (total > 0.0):
            raise ValueError("degenerate Gibbs conditional (zero mass)")
        thr = u_v[t] * total
        acc = 0.0
        new = <cnp.int32_t> (k - 1)
        for zz in range(k):
            acc += buf[zz]
            if acc > thr:
                new = <cnp.int32_t> zz
                break
        z_v[t] = new
        n_dz_v[d, new] += 1
        n_zw_v[new, w] += 1
        n_z_v[new] += 1


def btm_sweep(w1, w2, z, n_z, n_zw, double alpha, double beta, uniforms):
    cdef cnp.int32_t[::1] a_v = w1
    cdef cnp.int32_t[::1] b_v = w2
    cdef cnp.int32_t[::1] z_v = z
    cdef cnp.int32_t[::1] n_z_v = n_z
    cdef cnp.int32_t[:, ::1] n_zw_v = n_zw
    cdef double[::1] u_v = uniforms
    cdef Py_ssize_t n_biterms = z_v.shape[0]
    cdef Py_ssize_t k = n_zw_v.shape[0]
    cdef Py_ssize_t vocab = n_zw_v.shape[1]
    cdef double vbeta = vocab * beta
    cdef double[::1] buf = np.empty(k, dtype=np.float64)
    cdef Py_ssize_t t, zz
    cdef cnp.int32_t a, b, old, new
    cdef double p, total, thr, acc, den
    for t in range(n_biterms):
        a = a_v[t]
        b = b_v[t]
        old = z_v[t]
        n_z_v[old] -= 1
        n_zw_v[old, a] -= 1
        n_zw_v[old, b] -= 1
        total = 0.0
        for zz in range(k):
            den = 2.0 * n_z_v[zz] + vbeta
            p = (n_z_v[zz] + alpha) * (n_zw_v[zz, a] + beta) * (n_zw_v[zz, b] + beta) / (den * den)
            buf[zz] = p
            total += p
        if not (total > 0.0):
            raise ValueError("degenerate Gibbs conditional (zero mass)")
        thr = u_v[t] * total
        acc = 0.0
        new = <cnp.int32_t> (k - 1)
        for zz in range(k):
            acc += buf[zz]
            if acc > thr:
                new = <cnp.int32_t> zz
                break
        z_v[t] = new
        n_z_v[new] += 1
        n_zw_v[new, a] += 1
        n_zw_v[new, b] += 1


cdef inline double _sqdist(const double[:, ::1] A, Py_ssize_t i,
                           const double[:, ::1] B, Py_ssize_t j,
                           Py_ssize_t dim) nogil:
    cdef double acc = 0.0
    cdef double diff
    cdef Py_ssize_t m
    for m in range(dim):
        diff = A[i, m] - B[j, m]
        acc += diff * diff
    return acc


cdef bint _repair_empty(const double[:, ::1] X, cnp.int32_t[::1] labels,
                        const double[:, ::1] C, Py_ssize_t k):
    """Seize the farthest point (ties: lowest index) for each empty cluster."""
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t dim = X.shape[1]
    cdef cnp.int64_t[::1] counts = np.zeros(k, dtype=np.int64)
    cdef Py_ssize_t i, c, p
    cdef bint any_empty = False
    cdef bint repaired = False
    cdef double best
    for i in range(n):
        counts[labels[i]] += 1
    for c in range(k):
        if counts[c] == 0:
            any_empty = True
            break
    if not any_empty:
        return False
    cdef double[::1] dist = np.empty(n, dtype=np.float64)
    for i in range(n):
        dist[i] = _sqdist(X, i, C, labels[i], dim)
    for c in range(k):
        while counts[c] == 0:
            p = 0
            best = -INFINITY
            for i in range(n):
                if dist[i] > best:
                    best = dist[i]
                    p = i
            counts[labels[p]] -= 1
            labels[p] = <cnp.int32_t> c
            counts[c] += 1
            dist[p] = -1.0
            repaired = True
    return repaired


cdef void _cluster_means(const double[:, ::1] X, const cnp.int32_t[::1] labels,
                         double[:, ::1] means, Py_ssize_t k):
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t dim = X.shape[1]
    cdef cnp.int64_t[::1] counts = np.zeros(k, dtype=np.int64)
    cdef Py_ssize_t i, c, j
    for c in range(k):
        for j in range(dim):
            means[c, j] = 0.0
    for i in range(n):
        c = labels[i]
        counts[c] += 1
        for j in range(dim):
            means[c, j] += X[i, j]
    for c in range(k):
        for j in range(dim):
            means[c, j] /= counts[c]


def lloyd_run(X, centers, int max_iter, double tol_abs):
    cdef double[:, ::1] X_v = X
    cdef Py_ssize_t n = X_v.shape[0]
    cdef Py_ssize_t dim = X_v.shape[1]
    C_arr = np.array(centers, dtype=np.float64, copy=True, order="C")
    cdef double[:, ::1] C = C_arr
    cdef Py_ssize_t k = C.shape[0]
    labels_arr = np.zeros(n, dtype=np.int32)
    cdef cnp.int32_t[::1] labels = labels_arr
    new_arr = np.empty((k, dim), dtype=np.float64)
    cdef double[:, ::1] new_c = new_arr
    cdef Py_ssize_t i, c, j
    cdef int it, n_iter = 0
    cdef double d2, bestd, shift2, diff
    for it in range(1, max_iter + 1):
        n_iter = it
        for i in range(n):
            bestd = INFINITY
            for c in range(k):
                d2 = _sqdist(X_v, i, C, c, dim)
                if d2 < bestd:
                    bestd = d2
                    labels[i] = <cnp.int32_t> c
        _repair_empty(X_v, labels, C, k)
        _cluster_means(X_v, labels, new_c, k)
        shift2 = 0.0
        for c in range(k):
            for j in range(dim):
                diff = new_c[c, j] - C[c, j]
                shift2 += diff * diff
                C[c, j] = new_c[c, j]
        if shift2 <= tol_abs:
            break
    return labels_arr, C_arr, n_iter


def elkan_run(X, centers, int max_iter, double tol_abs):
    cdef double[:, ::1] X_v = X
    cdef Py_ssize_t n = X_v.shape[0]
    cdef Py_ssize_t dim = X_v.shape[1]
    C_arr = np.array(centers, dtype=np.float64, copy=True, order="C")
    cdef double[:, ::1] C = C_arr
    cdef Py_ssize_t k = C.shape[0]
    labels_arr = np.zeros(n, dtype=np.int32)
    cdef cnp.int32_t[::1] labels = labels_arr
    cdef double[:, ::1] L = np.zeros((n, k), dtype=np.float64)
    cdef double[::1] U = np.zeros(n, dtype=np.float64)
    cdef double[:, ::1] cc = np.zeros((k, k), dtype=np.float64)
    cdef double[::1] s = np.zeros(k, dtype=np.float64)
    cdef double[::1] shift = np.zeros(k, dtype=np.float64)
    cdef double[:, ::1] new_c = np.empty((k, dim), dtype=np.float64)
    cdef bint refresh = True
    cdef bint tight
    cdef Py_ssize_t i, c, c2, j, a
    cdef int it, n_iter = 0
    cdef double d, bestd, shift2, diff
    for it in range(1, max_iter + 1):
        n_iter = it
        if refresh:
            for i in range(n):
                bestd = INFINITY
                for c in range(k):
                    d = sqrt(_sqdist(X_v, i, C, c, dim))
                    L[i, c] = d
                    if d < bestd:
                        bestd = d
                        labels[i] = <cnp.int32_t> c
                U[i] = bestd
            refresh = False
        else:
            for c in range(k):
                s[c] = INFINITY
                cc[c, c] = 0.0
            for c in range(k):
                for c2 in range(c + 1, k):
                    d = sqrt(_sqdist(C, c, C, c2, dim))
                    cc[c, c2] = d
                    cc[c2, c] = d
            for c in range(k):
                for c2 in range(k):
                    if c2 != c and 0.5 * cc[c, c2] < s[c]:
                        s[c] = 0.5 * cc[c, c2]
            for i in range(n):
                a = labels[i]
                if U[i] <= s[a]:
                    continue
                tight = False
                for c in range(k):
                    if c == a:
                        continue
                    if U[i] <= L[i, c]:
                        continue
                    if U[i] <= 0.5 * cc[a, c]:
                        continue
                    if not tight:
                        d = sqrt(_sqdist(X_v, i, C, a, dim))
                        U[i] = d
                        L[i, a] = d
                        tight = True
                        if U[i] <= L[i, c] or U[i] <= 0.5 * cc[a, c]:
                            continue
                    d = sqrt(_sqdist(X_v, i, C, c, dim))
                    L[i, c] = d
                    if d < U[i]:
                        a = c
                        labels[i] = <cnp.int32_t> c
                        U[i] = d
        if _repair_empty(X_v, labels, C, k):
            refresh = True
        _cluster_means(X_v, labels, new_c, k)
        shift2 = 0.0
        for c in range(k):
            d = 0.0
            for j in range(dim):
                diff = new_c[c, j] - C[c, j]
                d += diff * diff
            shift[c] = sqrt(d)
            shift2 += d
        if not refresh:
            for i in range(n):
                U[i] += shift[labels[i]]
                for c in range(k):
                    L[i, c] = L[i, c] - shift[c]
                    if L[i, c] < 0.0:
                        L[i, c] = 0.0
        for c in range(k):
            for j in range(dim):
                C[c, j] = new_c[c, j]
        if shift2 <= tol_abs:
            break
    return labels_arr, C_arr, n_iter

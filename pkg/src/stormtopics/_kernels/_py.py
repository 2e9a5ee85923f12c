"""Pure-Python/numpy kernel backend.

Semantics must match ``_ext`` exactly: the Gibbs sweeps perform the same
floating-point operations in the same order (plain Python floats are IEEE
doubles), so a fixed uniform stream yields bit-identical chains on either
backend. The K-Means runs share the iteration structure (assign, repair,
update, converge) with the compiled backend.
"""

from __future__ import annotations

import numpy as np

name = "python"


def lda_sweep(doc_of, word_of, z, n_dz, n_zw, n_z, alpha, beta, uniforms):
    """One collapsed-Gibbs sweep over all tokens; mutates z and counts in place."""
    k, vocab = n_zw.shape
    vbeta = vocab * beta
    doc_l = doc_of.tolist()
    word_l = word_of.tolist()
    z_l = z.tolist()
    n_dz_l = n_dz.tolist()
    n_zw_l = n_zw.tolist()
    n_z_l = n_z.tolist()
    u_l = uniforms.tolist()
    buf = [0.0] * k
    for t in range(len(z_l)):
        d = doc_l[t]
        w = word_l[t]
        old = z_l[t]
        row_d = n_dz_l[d]
        row_d[old] -= 1
        n_zw_l[old][w] -= 1
        n_z_l[old] -= 1
        total = 0.0
        try:
            for zz in range(k):
                p = (n_zw_l[zz][w] + beta) / (n_z_l[zz] + vbeta) * (row_d[zz] + alpha)
                buf[zz] = p
                total += p
        except ZeroDivisionError:
            total = 0.0
        if not (total > 0.0):
            raise ValueError("degenerate Gibbs conditional (zero mass)")
        thr = u_l[t] * total
        acc = 0.0
        new = k - 1
        for zz in range(k):
            acc += buf[zz]
            if acc > thr:
                new = zz
                break
        z_l[t] = new
        row_d[new] += 1
        n_zw_l[new][w] += 1
        n_z_l[new] += 1
    z[:] = z_l
    n_dz[:] = n_dz_l
    n_zw[:] = n_zw_l
    n_z[:] = n_z_l


def btm_sweep(w1, w2, z, n_z, n_zw, alpha, beta, uniforms):
    """One collapsed-Gibbs sweep over all biterms; mutates z and counts in place."""
    k, vocab = n_zw.shape
    vbeta = vocab * beta
    a_l = w1.tolist()
    b_l = w2.tolist()
    z_l = z.tolist()
    n_z_l = n_z.tolist()
    n_zw_l = n_zw.tolist()
    u_l = uniforms.tolist()
    buf = [0.0] * k
    for t in range(len(z_l)):
        a = a_l[t]
        b = b_l[t]
        old = z_l[t]
        n_z_l[old] -= 1
        n_zw_l[old][a] -= 1
        n_zw_l[old][b] -= 1
        total = 0.0
        try:
            for zz in range(k):
                den = 2.0 * n_z_l[zz] + vbeta
                p = (n_z_l[zz] + alpha) * (n_zw_l[zz][a] + beta) * (n_zw_l[zz][b] + beta) / (den * den)
                buf[zz] = p
                total += p
        except ZeroDivisionError:
            total = 0.0
        if not (total > 0.0):
            raise ValueError("degenerate Gibbs conditional (zero mass)")
        thr = u_l[t] * total
        acc = 0.0
        new = k - 1
        for zz in range(k):
            acc += buf[zz]
            if acc > thr:
                new = zz
                break
        z_l[t] = new
        n_z_l[new] += 1
        n_zw_l[new][a] += 1
        n_zw_l[new][b] += 1
    z[:] = z_l
    n_z[:] = n_z_l
    n_zw[:] = n_zw_l


def _sqdist_all(X, C):
    # |x|^2 - 2 x.c + |c|^2; tiny negatives from cancellation clipped at 0
    d2 = (
        (X * X).sum(axis=1)[:, None]
        - 2.0 * (X @ C.T)
        + (C * C).sum(axis=1)[None, :]
    )
    np.maximum(d2, 0.0, out=d2)
    return d2


def _cluster_means(X, labels, k):
    d = X.shape[1]
    means = np.zeros((k, d), dtype=np.float64)
    for c in range(k):
        members = X[labels == c]
        # repair guarantees no empty cluster here
        means[c] = members.mean(axis=0)
    return means


def _repair_empty(X, labels, centers, k):
    """Seize the point farthest from its assigned centroid for each empty cluster.

    Ties break to the lowest point index; a seized point cannot be seized
    again. Returns True when any repair happened.
    """
    counts = np.bincount(labels, minlength=k)
    if (counts > 0).all():
        return False
    dist = ((X - centers[labels]) ** 2).sum(axis=1)
    repaired = False
    for c in range(k):
        while counts[c] == 0:
            p = int(np.argmax(dist))
            counts[labels[p]] -= 1
            labels[p] = c
            counts[c] += 1
            dist[p] = -1.0  # cannot be seized twice
            repaired = True
    return repaired


def lloyd_run(X, centers, max_iter, tol_abs):
    """Plain Lloyd iterations; returns (labels, centers, n_iter)."""
    k = centers.shape[0]
    C = np.array(centers, dtype=np.float64, copy=True)
    labels = np.zeros(X.shape[0], dtype=np.int32)
    n_iter = 0
    for it in range(1, max_iter + 1):
        n_iter = it
        d2 = _sqdist_all(X, C)
        labels = np.argmin(d2, axis=1).astype(np.int32)
        _repair_empty(X, labels, C, k)
        new_c = _cluster_means(X, labels, k)
        shift2 = float(((new_c - C) ** 2).sum())
        C = new_c
        if shift2 <= tol_abs:
            break
    return labels, C, n_iter


def elkan_run(X, centers, max_iter, tol_abs):
    """Triangle-inequality-accelerated iterations; same results as Lloyd."""
    n = X.shape[0]
    k = centers.shape[0]
    C = np.array(centers, dtype=np.float64, copy=True)
    labels = np.zeros(n, dtype=np.int32)
    U = np.zeros(n, dtype=np.float64)
    L = np.zeros((n, k), dtype=np.float64)
    refresh = True
    n_iter = 0
    rows = np.arange(n)
    for it in range(1, max_iter + 1):
        n_iter = it
        if refresh:
            L = np.sqrt(_sqdist_all(X, C))
            labels = np.argmin(L, axis=1).astype(np.int32)
            U = L[rows, labels]
            refresh = False
        else:
            cc = np.sqrt(_sqdist_all(C, C))
            far = cc.copy()
            np.fill_diagonal(far, np.inf)
            s = 0.5 * far.min(axis=1)
            idx = np.flatnonzero(U > s[labels])
            if idx.size:
                # tighten upper bounds exactly for points that may switch
                d_lab = np.sqrt(((X[idx] - C[labels[idx]]) ** 2).sum(axis=1))
                U[idx] = d_lab
                L[idx, labels[idx]] = d_lab
                for c in range(k):
                    li = labels[idx]
                    cand = idx[
                        (li != c)
                        & (U[idx] > L[idx, c])
                        & (U[idx] > 0.5 * cc[li, c])
                    ]
                    if cand.size == 0:
                        continue
                    dc = np.sqrt(((X[cand] - C[c]) ** 2).sum(axis=1))
                    L[cand, c] = dc
                    better = dc < U[cand]
                    sw = cand[better]
                    labels[sw] = c
                    U[sw] = dc[better]
        if _repair_empty(X, labels, C, k):
            refresh = True
        new_c = _cluster_means(X, labels, k)
        shift2 = float(((new_c - C) ** 2).sum())
        if not refresh:
            shift = np.sqrt(((new_c - C) ** 2).sum(axis=1))
            U += shift[labels]
            L = np.maximum(L - shift[None, :], 0.0)
        C = new_c
        if shift2 <= tol_abs:
            break
    return labels, C, n_iter

#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Runs each hot kernel on a synthetic workload under both backends, checks
they agree, and prints a timing table:

    python3 benchmarks/bench_kernels.py [--scale N]
"""

import argparse
import time

import numpy as np

from stormtopics._kernels import _py

try:
    from stormtopics._kernels import _ext
except ImportError:
    _ext = None


def time_fn(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_lda(backend, scale):
    rng = np.random.default_rng(0)
    n_docs, k, vocab = 200 * scale, 9, 400
    n_tokens = n_docs * 12
    doc_of = rng.integers(0, n_docs, n_tokens).astype(np.int32)
    word_of = rng.integers(0, vocab, n_tokens).astype(np.int32)

    def run():
        r = np.random.default_rng(1)
        z = r.integers(0, k, n_tokens).astype(np.int32)
        n_dz = np.zeros((n_docs, k), np.int32)
        n_zw = np.zeros((k, vocab), np.int32)
        n_z = np.zeros(k, np.int32)
        np.add.at(n_dz, (doc_of, z), 1)
        np.add.at(n_zw, (z, word_of), 1)
        np.add.at(n_z, z, 1)
        for _ in range(20):
            u = r.random(n_tokens)
            backend.lda_sweep(doc_of, word_of, z, n_dz, n_zw, n_z, 5.0, 0.01, u)
        return z

    return run


def bench_btm(backend, scale):
    rng = np.random.default_rng(0)
    k, vocab = 9, 400
    n_biterms = 5000 * scale
    w1 = rng.integers(0, vocab, n_biterms).astype(np.int32)
    w2 = rng.integers(0, vocab, n_biterms).astype(np.int32)

    def run():
        r = np.random.default_rng(1)
        z = r.integers(0, k, n_biterms).astype(np.int32)
        n_z = np.zeros(k, np.int32)
        n_zw = np.zeros((k, vocab), np.int32)
        np.add.at(n_z, z, 1)
        np.add.at(n_zw, (z, w1), 1)
        np.add.at(n_zw, (z, w2), 1)
        for _ in range(20):
            u = r.random(n_biterms)
            backend.btm_sweep(w1, w2, z, n_z, n_zw, 5.0, 0.005, u)
        return z

    return run


def bench_kmeans(backend, scale, runner):
    rng = np.random.default_rng(0)
    n, dim, k = 2000 * scale, 32, 9
    X = np.ascontiguousarray(rng.normal(size=(n, dim)))
    init = np.ascontiguousarray(X[rng.choice(n, k, replace=False)])

    def run():
        return getattr(backend, runner)(X, init, 50, 0.0)

    return run


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--scale", type=int, default=1)
    args = parser.parse_args()

    if _ext is None:
        print("compiled backend not built; run pip install -e . first")
        return

    workloads = [
        ("lda_sweep x20", bench_lda),
        ("btm_sweep x20", bench_btm),
        ("lloyd_run", lambda b, s: bench_kmeans(b, s, "lloyd_run")),
        ("elkan_run", lambda b, s: bench_kmeans(b, s, "elkan_run")),
    ]
    print(f"{'workload':<16} {'python':>10} {'cython':>10} {'speedup':>9}")
    for name, make in workloads:
        py_run = make(_py, args.scale)
        ext_run = make(_ext, args.scale)
        ref_py = py_run()
        ref_ext = ext_run()
        if name.startswith(("lda", "btm")):
            assert np.array_equal(ref_py, ref_ext), f"{name}: backends disagree"
        else:
            assert np.array_equal(ref_py[0], ref_ext[0]), f"{name}: labels disagree"
        t_py = time_fn(py_run)
        t_ext = time_fn(ext_run)
        print(f"{name:<16} {t_py:>9.3f}s {t_ext:>9.3f}s {t_py / t_ext:>8.1f}x")


if __name__ == "__main__":
    main()

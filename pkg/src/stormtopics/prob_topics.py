"""LDA and BTM baselines trained by collapsed Gibbs sampling.

Both samplers run ``passes * iterations`` full sweeps (the two knobs exist
only for configuration parity; there is no burn-in averaging, the point
estimate comes from the final count state). Topic-word and document-topic
distributions are estimated with prior smoothing:

* LDA:  ``phi[z][w] = (n_zw + beta) / (n_z + V*beta)``,
        ``theta[d][z] = (n_dz + alpha) / (n_d + k*alpha)``
* BTM:  ``phi[z][w] = (n_zw + beta) / (2*n_z + V*beta)``,
        ``tau[z] = (n_z + alpha) / (B + k*alpha)``

Document assignment follows the cluster-generation rules: LDA scores a
document by summing ``p(z|w)`` over its words with
``p(z|w) ∝ phi[z][w] * tau[z]`` (``tau`` the corpus-level topic proportions
from training counts); BTM averages ``p(z|b)`` over the document's biterms
with ``p(z|b) ∝ tau[z] * phi[z][w1] * phi[z][w2]``, falling back to
single-word scoring for documents without biterms.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from stormtopics import _kernels
from stormtopics.corpus import Document
from stormtopics.errors import ValidationError


@dataclass
class TopicAssignment:
    topic: int
    degenerate: bool = False


@dataclass
class LdaModel:
    k: int
    alpha: float
    beta: float
    phi: np.ndarray  # (k, V)
    theta: np.ndarray  # (n_docs, k)
    passes: int
    iterations: int
    terms: tuple[str, ...]
    doc_ids: tuple[str, ...]
    tau: np.ndarray  # (k,) corpus-level topic proportions from counts
    seed: int

    def term_index(self) -> dict[str, int]:
        return {t: i for i, t in enumerate(self.terms)}


@dataclass
class BtmModel:
    k: int
    window: int
    alpha: float
    beta: float
    phi: np.ndarray  # (k, V)
    tau: np.ndarray  # (k,)
    biterms: tuple[tuple[int, int], ...]  # term-id pairs, a <= b
    terms: tuple[str, ...]
    iterations: int
    seed: int

    def term_index(self) -> dict[str, int]:
        return {t: i for i, t in enumerate(self.terms)}


def extract_biterms(doc: Document, window: int) -> list[tuple[str, str]]:
    """Unordered within-window token pairs, duplicates kept.

    Position ``i`` pairs with every position ``j`` in ``(i, i+window)``
    (exclusive), so all pairs of a document with ``len <= window`` are
    produced. Pairs are canonicalized with the lexicographically smaller
    token first.
    """
    if window < 2:
        raise ValidationError("window must be >= 2")
    toks = doc.tokens
    out: list[tuple[str, str]] = []
    for i in range(len(toks)):
        for j in range(i + 1, min(i + window, len(toks))):
            a, b = toks[i], toks[j]
            out.append((a, b) if a <= b else (b, a))
    return out


def _build_term_ids(token_stream) -> dict[str, int]:
    ids: dict[str, int] = {}
    for tok in token_stream:
        if tok not in ids:
            ids[tok] = len(ids)
    return ids


def lda_fit(
    docs: Sequence[Document],
    k: int,
    alpha: Optional[float] = None,
    beta: float = 0.01,
    passes: int = 10,
    iterations: int = 100,
    seed: int = 0,
    debug: bool = False,
) -> LdaModel:
    """Collapsed Gibbs sampling over token-topic assignments.

    ``k=1`` is allowed as the degenerate single-topic case (phi is then the
    smoothed empirical unigram distribution).
    """
    if not docs:
        raise ValidationError("cannot fit LDA on an empty corpus")
    if k < 1:
        raise ValidationError("k must be >= 1")
    if alpha is None:
        alpha = 50.0 / k
    if alpha <= 0 or beta <= 0:
        raise ValidationError("priors must be positive")
    term_ids = _build_term_ids(t for d in docs for t in d.tokens)
    if not term_ids:
        raise ValidationError("corpus vocabulary is empty after preprocessing")
    vocab = len(term_ids)

    doc_of = []
    word_of = []
    for di, doc in enumerate(docs):
        for tok in doc.tokens:
            doc_of.append(di)
            word_of.append(term_ids[tok])
    doc_of = np.asarray(doc_of, dtype=np.int32)
    word_of = np.asarray(word_of, dtype=np.int32)
    n_tokens = doc_of.shape[0]

    rng = np.random.default_rng(seed)
    z = rng.integers(0, k, size=n_tokens, dtype=np.int32)
    n_dz = np.zeros((len(docs), k), dtype=np.int32)
    n_zw = np.zeros((k, vocab), dtype=np.int32)
    n_z = np.zeros(k, dtype=np.int32)
    np.add.at(n_dz, (doc_of, z), 1)
    np.add.at(n_zw, (z, word_of), 1)
    np.add.at(n_z, z, 1)

    for _ in range(passes * iterations):
        uniforms = rng.random(n_tokens)
        _kernels.lda_sweep(doc_of, word_of, z, n_dz, n_zw, n_z, alpha, beta, uniforms)
        if debug:
            _check_lda_counts(n_dz, n_zw, n_z, n_tokens)

    phi = (n_zw + beta) / (n_z + vocab * beta)[:, None]
    n_d = n_dz.sum(axis=1)
    theta = (n_dz + alpha) / (n_d + k * alpha)[:, None]
    tau = n_z / n_tokens if n_tokens else np.full(k, 1.0 / k)
    terms = tuple(term_ids)
    return LdaModel(
        k=k,
        alpha=alpha,
        beta=beta,
        phi=phi,
        theta=theta,
        passes=passes,
        iterations=iterations,
        terms=terms,
        doc_ids=tuple(d.id for d in docs),
        tau=tau,
        seed=seed,
    )


def _check_lda_counts(n_dz, n_zw, n_z, n_tokens):
    if not (n_zw.sum(axis=1) == n_z).all():
        raise AssertionError("topic-word counts inconsistent with topic totals")
    if n_z.sum() != n_tokens or n_dz.sum() != n_tokens:
        raise AssertionError("total assignments changed during sweep")
    if (n_dz < 0).any() or (n_zw < 0).any():
        raise AssertionError("negative count")


def btm_fit(
    biterms: Sequence[tuple[str, str]],
    k: int,
    alpha: Optional[float] = None,
    beta: float = 0.005,
    iterations: int = 1000,
    seed: int = 0,
    window: int = 15,
    debug: bool = False,
) -> BtmModel:
    """Collapsed Gibbs sampling over biterm-topic assignments."""
    if not biterms:
        raise ValidationError(
            "no biterms to model (every document has fewer than 2 tokens)"
        )
    if k < 2:
        raise ValidationError("k must be >= 2")
    if alpha is None:
        alpha = 50.0 / k
    if alpha <= 0 or beta <= 0:
        raise ValidationError("priors must be positive")
    term_ids = _build_term_ids(t for pair in biterms for t in pair)
    vocab = len(term_ids)
    w1 = np.asarray([term_ids[a] for a, _ in biterms], dtype=np.int32)
    w2 = np.asarray([term_ids[b] for _, b in biterms], dtype=np.int32)
    n_biterms = w1.shape[0]

    rng = np.random.default_rng(seed)
    z = rng.integers(0, k, size=n_biterms, dtype=np.int32)
    n_z = np.zeros(k, dtype=np.int32)
    n_zw = np.zeros((k, vocab), dtype=np.int32)
    np.add.at(n_z, z, 1)
    np.add.at(n_zw, (z, w1), 1)
    np.add.at(n_zw, (z, w2), 1)

    for _ in range(iterations):
        uniforms = rng.random(n_biterms)
        _kernels.btm_sweep(w1, w2, z, n_z, n_zw, alpha, beta, uniforms)
        if debug:
            if not (n_zw.sum(axis=1) == 2 * n_z).all() or n_z.sum() != n_biterms:
                raise AssertionError("biterm counts inconsistent")

    phi = (n_zw + beta) / (2 * n_z + vocab * beta)[:, None]
    tau = (n_z + alpha) / (n_biterms + k * alpha)
    pairs = tuple(
        (min(int(a), int(b)), max(int(a), int(b))) for a, b in zip(w1, w2)
    )
    return BtmModel(
        k=k,
        window=window,
        alpha=alpha,
        beta=beta,
        phi=phi,
        tau=tau,
        biterms=pairs,
        terms=tuple(term_ids),
        iterations=iterations,
        seed=seed,
    )


def lda_assign(model: LdaModel, doc: Document) -> TopicAssignment:
    """Argmax of summed per-word topic posteriors; unseen words contribute zero."""
    index = model.term_index()
    scores = np.zeros(model.k, dtype=np.float64)
    seen = 0
    for tok in doc.tokens:
        wi = index.get(tok)
        if wi is None:
            continue
        pw = model.phi[:, wi] * model.tau
        total = pw.sum()
        if total > 0:
            scores += pw / total
            seen += 1
    if seen == 0:
        return TopicAssignment(topic=0, degenerate=True)
    return TopicAssignment(topic=int(np.argmax(scores)))


def btm_assign(model: BtmModel, doc: Document) -> TopicAssignment:
    """Average of per-biterm topic posteriors; single-word fallback for short docs."""
    index = model.term_index()
    pairs = [
        (index[a], index[b])
        for a, b in extract_biterms(doc, model.window)
        if a in index and b in index
    ]
    if pairs:
        scores = np.zeros(model.k, dtype=np.float64)
        for a, b in pairs:
            pz = model.tau * model.phi[:, a] * model.phi[:, b]
            total = pz.sum()
            if total > 0:
                scores += pz / total
        scores /= len(pairs)
        return TopicAssignment(topic=int(np.argmax(scores)))
    word_ids = [index[t] for t in doc.tokens if t in index]
    if not word_ids:
        return TopicAssignment(topic=0, degenerate=True)
    scores = model.phi[:, word_ids].sum(axis=1)
    return TopicAssignment(topic=int(np.argmax(scores)))


def topic_top_words(
    phi: np.ndarray, terms: Sequence[str], m: int
) -> list[list[tuple[str, float]]]:
    """Top-m words per topic, descending by probability, ties by term id."""
    if m < 1:
        raise ValidationError("m must be >= 1")
    phi = np.asarray(phi)
    vocab = phi.shape[1]
    if len(terms) != vocab:
        raise ValidationError("terms length does not match phi columns")
    m = min(m, vocab)
    out = []
    for row in phi:
        order = np.lexsort((np.arange(vocab), -row))[:m]
        out.append([(terms[i], float(row[i])) for i in order])
    return out


def assign_corpus(model, docs: Sequence[Document], model_tag: str):
    """Cluster every document with the model's assignment rule."""
    from stormtopics.kmeans import Clustering

    assign = lda_assign if isinstance(model, LdaModel) else btm_assign
    assignments = {}
    degenerate = []
    for doc in docs:
        res = assign(model, doc)
        assignments[doc.id] = res.topic
        if res.degenerate:
            degenerate.append(doc.id)
    clustering = Clustering(
        model_tag=model_tag,
        k=model.k,
        assignments=assignments,
        inertia=0.0,
        seed=model.seed,
    )
    return clustering, degenerate


# Inline phi above this many cells is replaced by a float32 sidecar file.
PHI_SIDECAR_CELLS = 262144


def save_model(model, directory, name: str) -> str:
    """Serialize a model to JSON, with a float32 sidecar for large phi."""
    os.makedirs(directory, exist_ok=True)
    common = {
        "k": model.k,
        "alpha": model.alpha,
        "beta": model.beta,
        "terms": list(model.terms),
        "seed": model.seed,
    }
    sidecar = model.phi.size > PHI_SIDECAR_CELLS
    if isinstance(model, LdaModel):
        common.update(
            {
                "kind": "lda",
                "passes": model.passes,
                "iterations": model.iterations,
                "doc_ids": list(model.doc_ids),
                "tau": model.tau.tolist(),
            }
        )
        extra_arrays = {"theta": model.theta}
    else:
        common.update(
            {
                "kind": "btm",
                "window": model.window,
                "iterations": model.iterations,
                "tau": model.tau.tolist(),
                "biterms": [list(p) for p in model.biterms],
            }
        )
        extra_arrays = {}
    path = os.path.join(directory, f"{name}.json")
    if sidecar:
        common["phi"] = {"file": f"{name}.phi.f32", "rows": int(model.phi.shape[0])}
        np.ascontiguousarray(model.phi, dtype="<f4").tofile(
            os.path.join(directory, f"{name}.phi.f32")
        )
    else:
        common["phi"] = model.phi.tolist()
    for key, arr in extra_arrays.items():
        common[key] = arr.tolist()
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(common, fh, sort_keys=True)
        fh.write("\n")
    return path


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    terms = tuple(str(t) for t in raw["terms"])
    phi_spec = raw["phi"]
    if isinstance(phi_spec, dict):
        side = os.path.join(os.path.dirname(path), phi_spec["file"])
        phi = np.fromfile(side, dtype="<f4").astype(np.float64)
        phi = phi.reshape(int(phi_spec["rows"]), len(terms))
    else:
        phi = np.asarray(phi_spec, dtype=np.float64)
    if raw["kind"] == "lda":
        return LdaModel(
            k=int(raw["k"]),
            alpha=float(raw["alpha"]),
            beta=float(raw["beta"]),
            phi=phi,
            theta=np.asarray(raw["theta"], dtype=np.float64),
            passes=int(raw["passes"]),
            iterations=int(raw["iterations"]),
            terms=terms,
            doc_ids=tuple(str(d) for d in raw["doc_ids"]),
            tau=np.asarray(raw["tau"], dtype=np.float64),
            seed=int(raw["seed"]),
        )
    if raw["kind"] == "btm":
        return BtmModel(
            k=int(raw["k"]),
            window=int(raw["window"]),
            alpha=float(raw["alpha"]),
            beta=float(raw["beta"]),
            phi=phi,
            tau=np.asarray(raw["tau"], dtype=np.float64),
            biterms=tuple((int(a), int(b)) for a, b in raw["biterms"]),
            terms=terms,
            iterations=int(raw["iterations"]),
            seed=int(raw["seed"]),
        )
    raise ValidationError(f"unknown model kind {raw.get('kind')!r}")

"""Automated topic-coherence metrics.

Direct confirmation (sliding-window NPMI, averaged over keyword pairs) and
indirect confirmation (cosine similarity between NPMI context vectors built
from tweet-level co-occurrence, averaged over keyword pairs).

Formulas, with probabilities as context-relative frequencies::

    PMI(w1, w2)  = ln((P(w1,w2) + eps) / (P(w1) * P(w2)))
    NPMI(w1, w2) = (PMI(w1, w2) / -ln(P(w1,w2) + eps)) ** gamma

A word with zero marginal count contributes the floor value -1.0 instead
(silently skipping absent words would inflate coherence; the number of such
words is reported). The self-confirmation NPMI(w, w) uses the occurrence
count as the joint count.

Sliding-window counting: a document of n tokens yields
``max(n - window + 1, 1)`` virtual documents, tokens[s:s+window] for each
start s (documents shorter than the window are a single truncated window,
empty documents a single empty one). Windows never cross document
boundaries. With ``window >= max document length`` this reduces exactly to
document-level counting.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from stormtopics.corpus import Document
from stormtopics.errors import ValidationError

NPMI_FLOOR = -1.0

TOPIC_UNION = "topic-union"
FULL_VOCABULARY = "full-vocabulary"


@dataclass(frozen=True)
class CoherenceConfig:
    window: int = 10
    epsilon: float = 1e-12
    gamma: float = 1.0
    topn: int = 10
    context_scope: str = TOPIC_UNION

    def __post_init__(self):
        if self.window < 2:
            raise ValidationError("window must be >= 2")
        if self.epsilon <= 0:
            raise ValidationError("epsilon must be > 0")
        if self.topn < 2:
            raise ValidationError("topn must be >= 2")
        if self.context_scope not in (TOPIC_UNION, FULL_VOCABULARY):
            raise ValidationError(f"unknown context_scope {self.context_scope!r}")


@dataclass
class CooccurrenceCounts:
    mode: str  # "window" | "document"
    n_contexts: int
    single: dict[str, int]
    pair: dict[tuple[str, str], int]

    def joint(self, w1: str, w2: str) -> int:
        if w1 == w2:
            return self.single.get(w1, 0)
        key = (w1, w2) if w1 <= w2 else (w2, w1)
        return self.pair.get(key, 0)

    def vocabulary(self) -> list[str]:
        return sorted(self.single)


def _merge_intervals(intervals: list[tuple[int, int]]) -> list[tuple[int, int]]:
    # inputs sorted by start; closed integer intervals
    merged = [intervals[0]]
    for lo, hi in intervals[1:]:
        plo, phi = merged[-1]
        if lo <= phi + 1:
            if hi > phi:
                merged[-1] = (plo, hi)
        else:
            merged.append((lo, hi))
    return merged


def _intersect_size(a: list[tuple[int, int]], b: list[tuple[int, int]]) -> int:
    size = 0
    i = j = 0
    while i < len(a) and j < len(b):
        lo = max(a[i][0], b[j][0])
        hi = min(a[i][1], b[j][1])
        if lo <= hi:
            size += hi - lo + 1
        if a[i][1] < b[j][1]:
            i += 1
        else:
            j += 1
    return size


def count_windows(
    docs: Sequence[Document], window: int, terms: Optional[Iterable[str]] = None
) -> CooccurrenceCounts:
    """Boolean co-occurrence counts over sliding-window virtual documents.

    Counting is interval-based: for each term the set of window starts that
    cover one of its occurrences is maintained as a union of integer
    intervals; singles are union sizes and pairs intersection sizes. An
    optional ``terms`` filter restricts counting to the given words.
    """
    if window < 2:
        raise ValidationError("window must be >= 2")
    wanted = None if terms is None else set(terms)
    single: Counter = Counter()
    pair: Counter = Counter()
    n_contexts = 0
    for doc in docs:
        n = len(doc.tokens)
        n_windows = max(n - window + 1, 1)
        n_contexts += n_windows
        positions: dict[str, list[int]] = {}
        for p, tok in enumerate(doc.tokens):
            if wanted is not None and tok not in wanted:
                continue
            positions.setdefault(tok, []).append(p)
        if not positions:
            continue
        spans: dict[str, list[tuple[int, int]]] = {}
        for tok, ps in positions.items():
            iv = [(max(0, p - window + 1), min(p, n_windows - 1)) for p in ps]
            spans[tok] = _merge_intervals(iv)
            single[tok] += sum(hi - lo + 1 for lo, hi in spans[tok])
        toks = sorted(spans)
        for i in range(len(toks)):
            for j in range(i + 1, len(toks)):
                common = _intersect_size(spans[toks[i]], spans[toks[j]])
                if common:
                    pair[(toks[i], toks[j])] += common
    return CooccurrenceCounts(
        mode="window", n_contexts=n_contexts, single=dict(single), pair=dict(pair)
    )


def count_documents(
    docs: Sequence[Document], terms: Optional[Iterable[str]] = None
) -> CooccurrenceCounts:
    """Boolean co-occurrence counts with one context per document."""
    wanted = None if terms is None else set(terms)
    single: Counter = Counter()
    pair: Counter = Counter()
    for doc in docs:
        present = sorted(
            t for t in set(doc.tokens) if wanted is None or t in wanted
        )
        for t in present:
            single[t] += 1
        for i in range(len(present)):
            for j in range(i + 1, len(present)):
                pair[(present[i], present[j])] += 1
    return CooccurrenceCounts(
        mode="document", n_contexts=len(docs), single=dict(single), pair=dict(pair)
    )


def npmi(
    counts: CooccurrenceCounts,
    w1: str,
    w2: str,
    epsilon: float = 1e-12,
    gamma: float = 1.0,
) -> float:
    """Normalized PMI of two words under the given counts.

    Returns the floor value -1.0 when either word has a zero marginal count.
    """
    n = counts.n_contexts
    s1 = counts.single.get(w1, 0)
    s2 = counts.single.get(w2, 0)
    if n == 0 or s1 == 0 or s2 == 0:
        return NPMI_FLOOR
    p1 = s1 / n
    p2 = s2 / n
    pj = counts.joint(w1, w2) / n
    pmi = math.log((pj + epsilon) / (p1 * p2))
    denom = -math.log(pj + epsilon)
    if denom == 0.0:
        return 0.0
    base = pmi / denom
    if gamma == 1.0:
        return base
    if float(gamma).is_integer():
        return base ** int(gamma)
    return math.pow(base, gamma)  # raises for negative base, by design


@dataclass
class TopicScore:
    score: float
    missing_terms: tuple[str, ...] = ()


def c_npmi(
    topic_terms: Sequence[str],
    counts: CooccurrenceCounts,
    cfg: CoherenceConfig = CoherenceConfig(),
) -> TopicScore:
    """Arithmetic mean of pairwise NPMI over the topic's words.

    Words absent from the reference corpus contribute the floor value and
    are reported in ``missing_terms``.
    """
    terms = list(topic_terms)
    if len(terms) < 2:
        raise ValidationError("a topic needs at least 2 words for coherence")
    missing = tuple(t for t in dict.fromkeys(terms) if counts.single.get(t, 0) == 0)
    vals = []
    for i in range(len(terms)):
        for j in range(i + 1, len(terms)):
            vals.append(npmi(counts, terms[i], terms[j], cfg.epsilon, cfg.gamma))
    return TopicScore(score=float(np.mean(vals)), missing_terms=missing)


def context_vector(
    w: str,
    word_set: Sequence[str],
    counts: CooccurrenceCounts,
    cfg: CoherenceConfig = CoherenceConfig(),
) -> np.ndarray:
    """NPMI confirmation vector of ``w`` against every word in ``word_set``."""
    return np.array(
        [npmi(counts, w, wj, cfg.epsilon, cfg.gamma) for wj in word_set],
        dtype=np.float64,
    )


def _cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    if u is v:
        return 1.0
    return float(np.dot(u, v) / (nu * nv))


def c_v(
    topic_terms: Sequence[str],
    counts: CooccurrenceCounts,
    word_set: Optional[Sequence[str]] = None,
    cfg: CoherenceConfig = CoherenceConfig(),
) -> TopicScore:
    """Mean pairwise cosine similarity of the words' context vectors.

    ``word_set`` fixes the vector dimensions (defaults to the topic's own
    distinct words); zero vectors have similarity 0 with anything.
    """
    terms = list(topic_terms)
    if len(terms) < 2:
        raise ValidationError("a topic needs at least 2 words for coherence")
    if word_set is None:
        word_set = list(dict.fromkeys(terms))
    missing = tuple(t for t in dict.fromkeys(terms) if counts.single.get(t, 0) == 0)
    vectors = {
        t: context_vector(t, word_set, counts, cfg) for t in dict.fromkeys(terms)
    }
    vals = []
    for i in range(len(terms)):
        for j in range(i + 1, len(terms)):
            vals.append(_cosine(vectors[terms[i]], vectors[terms[j]]))
    return TopicScore(score=float(np.mean(vals)), missing_terms=missing)


@dataclass
class ModelCoherence:
    metric: str
    score: float
    per_topic: list[TopicScore] = field(default_factory=list)


def model_coherence(
    all_topics: Sequence[Sequence[str]],
    docs: Sequence[Document],
    metric: str,
    cfg: CoherenceConfig = CoherenceConfig(),
) -> ModelCoherence:
    """Mean coherence over a model's topics (top ``cfg.topn`` words each)."""
    if not all_topics:
        raise ValidationError("need at least one topic")
    topics = [list(t)[: cfg.topn] for t in all_topics]
    union: list[str] = list(dict.fromkeys(w for t in topics for w in t))
    if metric == "c_npmi":
        counts = count_windows(docs, cfg.window, terms=union)
        scores = [c_npmi(t, counts, cfg) for t in topics]
    elif metric == "c_v":
        if cfg.context_scope == FULL_VOCABULARY:
            counts = count_documents(docs)
            word_set: Sequence[str] = counts.vocabulary()
        else:
            counts = count_documents(docs, terms=union)
            word_set = union
        scores = [c_v(t, counts, word_set, cfg) for t in topics]
    else:
        raise ValidationError(f"unknown coherence metric {metric!r}")
    return ModelCoherence(
        metric=metric,
        score=float(np.mean([s.score for s in scores])),
        per_topic=scores,
    )

"""Topic keyword extraction for embedding clusterings.

Three strategies over a clustering of preprocessed documents:

* ``tfidf`` — each cluster is concatenated into one cluster-document (the
  corpus is therefore k documents); a term whose cluster-document frequency
  exceeds ``mdf * k`` is excluded; ``tf`` is the raw in-cluster count, or
  ``1 + ln(count)`` with sublinear scaling; ``idf = ln((1+k)/(1+df)) + 1``;
  the score is ``tf * idf`` with no further normalization.
* ``attention`` — a term's score in a topic is the sum of its per-token
  attention over the topic's tweets; bundle tokens pass through the same
  token filtering as the corpus tokenizer before accumulating.
* ``combined`` — elementwise product of the two scores; terms missing from
  either side are dropped.

Rankings are descending by score, ties broken by term string. The grid
search sweeps mdf {0.6..1.0} x sublinear {off,on} x phrasing {off,on} for
all three strategies and selects the cell with the highest mean indirect
coherence (first cell in enumeration order on ties).
"""

from __future__ import annotations

import logging
import math
import unicodedata
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Optional, Sequence

from stormtopics.coherence import CoherenceConfig, c_v, count_documents
from stormtopics.corpus import (
    Document,
    PreprocessConfig,
    detect_phrases,
    filter_token,
    stopword_set,
)
from stormtopics.embedding_io import EmbeddingBundle
from stormtopics.errors import ValidationError
from stormtopics.kmeans import Clustering

logger = logging.getLogger(__name__)

GRID_MDF = (0.6, 0.7, 0.8, 0.9, 1.0)
STRATEGIES = ("tfidf", "attention", "combined")

# Defaults for the phrasing pass inside keyword extraction.
PHRASE_MIN_COUNT = 5
PHRASE_THRESHOLD = 10.0

EVAL_TOP_N = 10


@dataclass(frozen=True)
class TfIdfConfig:
    max_document_frequency: float = 1.0
    sublinear_tf: bool = False
    use_phrases: bool = False

    def __post_init__(self):
        if not (0.0 < self.max_document_frequency <= 1.0):
            raise ValidationError("max_document_frequency must be in (0, 1]")


@dataclass
class TopicKeywords:
    topic: int
    strategy: str
    ranked: list[tuple[str, float]] = field(default_factory=list)

    def terms(self, n: Optional[int] = None) -> list[str]:
        items = self.ranked if n is None else self.ranked[:n]
        return [t for t, _ in items]


def _check_coverage(clustering: Clustering, docs: Sequence[Document]):
    missing = [d.id for d in docs if d.id not in clustering.assignments]
    if missing:
        raise ValidationError(
            f"clustering does not cover {len(missing)} documents "
            f"(first: {missing[:5]})"
        )


def _rank(scores: dict[str, float], top_n: Optional[int]) -> list[tuple[str, float]]:
    ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked if top_n is None else ranked[:top_n]


def cluster_tfidf(
    clustering: Clustering,
    docs: Sequence[Document],
    cfg: TfIdfConfig,
    top_n: Optional[int] = None,
) -> list[TopicKeywords]:
    """Tf-Idf keywords with each cluster concatenated into one document."""
    _check_coverage(clustering, docs)
    if cfg.use_phrases:
        docs = detect_phrases(list(docs), PHRASE_MIN_COUNT, PHRASE_THRESHOLD)
    k = clustering.k
    cluster_counts: list[Counter] = [Counter() for _ in range(k)]
    for doc in docs:
        cluster_counts[clustering.assignments[doc.id]].update(doc.tokens)

    df: Counter = Counter()
    for counts in cluster_counts:
        df.update(counts.keys())
    max_df = cfg.max_document_frequency * k

    out = []
    for topic in range(k):
        counts = cluster_counts[topic]
        if not counts:
            logger.warning("topic %d has an empty cluster-document", topic)
            out.append(TopicKeywords(topic=topic, strategy="tfidf", ranked=[]))
            continue
        scores: dict[str, float] = {}
        for term, count in counts.items():
            if df[term] > max_df:
                continue
            tf = 1.0 + math.log(count) if cfg.sublinear_tf else float(count)
            idf = math.log((1 + k) / (1 + df[term])) + 1.0
            scores[term] = tf * idf
        out.append(
            TopicKeywords(topic=topic, strategy="tfidf", ranked=_rank(scores, top_n))
        )
    return out


def attention_scores(
    clustering: Clustering,
    bundle: EmbeddingBundle,
    pre_cfg: PreprocessConfig = PreprocessConfig(),
    top_n: Optional[int] = None,
) -> list[TopicKeywords]:
    """Sum per-token attention over each topic's tweets.

    Bundle tokens are surface tokens from the producer; each is normalized
    and filtered with the corpus rules before accumulating, so the output
    vocabulary matches the tokenizer's. Tweets without an attention row are
    skipped (logged with a count).
    """
    stop = stopword_set(pre_cfg)
    sums: list[defaultdict] = [defaultdict(float) for _ in range(clustering.k)]
    skipped = 0
    for tweet_id, topic in clustering.assignments.items():
        row = bundle.attention.get(tweet_id)
        if row is None:
            skipped += 1
            continue
        tokens, scores = row
        acc = sums[topic]
        for tok, score in zip(tokens, scores):
            normalized = unicodedata.normalize("NFKC", tok).casefold()
            term, _ = filter_token(normalized, pre_cfg, stop)
            if term is not None:
                acc[term] += float(score)
    if skipped:
        logger.warning("%d documents had no attention row and were skipped", skipped)
    return [
        TopicKeywords(topic=t, strategy="attention", ranked=_rank(dict(sums[t]), top_n))
        for t in range(clustering.k)
    ]


def combined_scores(tfidf: TopicKeywords, attn: TopicKeywords) -> TopicKeywords:
    """Product of the two scores per term; terms absent from either side drop."""
    if tfidf.topic != attn.topic:
        raise ValidationError(
            f"cannot combine keywords of topics {tfidf.topic} and {attn.topic}"
        )
    attn_map = dict(attn.ranked)
    scores = {
        term: score * attn_map[term]
        for term, score in tfidf.ranked
        if term in attn_map
    }
    return TopicKeywords(topic=tfidf.topic, strategy="combined", ranked=_rank(scores, None))


def combined_tables(
    tfidf: Sequence[TopicKeywords], attn: Sequence[TopicKeywords]
) -> list[TopicKeywords]:
    return [combined_scores(t, a) for t, a in zip(tfidf, attn)]


@dataclass(frozen=True)
class GridCell:
    strategy: str
    mdf: float
    sublinear: bool
    phrasing: bool
    score: float


@dataclass
class GridSearchResult:
    best: GridCell
    table: list[GridCell]


def grid_search(
    clustering: Clustering,
    docs: Sequence[Document],
    bundle: EmbeddingBundle,
    k_for_selection: int,
    pre_cfg: PreprocessConfig = PreprocessConfig(),
    coh_cfg: CoherenceConfig = CoherenceConfig(),
    top_n: int = EVAL_TOP_N,
    mdfs: Sequence[float] = GRID_MDF,
    sublinear_values: Sequence[bool] = (False, True),
    phrasing_values: Sequence[bool] = (False, True),
    strategies: Sequence[str] = STRATEGIES,
) -> GridSearchResult:
    """Sweep the keyword hyperparameter grid, scoring each cell by mean C_V.

    ``k_for_selection`` pins the topic count the selection is made at and
    must match the clustering. The default grid has exactly
    ``len(GRID_MDF) * 2 * 2 * 3 = 60`` cells; ties on the score keep the
    first cell in enumeration order (mdf, then sublinear, then phrasing,
    then strategy).
    """
    if clustering.k != k_for_selection:
        raise ValidationError(
            f"clustering has k={clustering.k}, selection expects {k_for_selection}"
        )
    _check_coverage(clustering, docs)
    docs_plain = list(docs)
    docs_phrased = detect_phrases(docs_plain, PHRASE_MIN_COUNT, PHRASE_THRESHOLD)
    attn_kw = attention_scores(clustering, bundle, pre_cfg, top_n=None)

    counts_cache: dict[bool, object] = {}

    def doc_counts(phrasing: bool):
        if phrasing not in counts_cache:
            counts_cache[phrasing] = count_documents(
                docs_phrased if phrasing else docs_plain
            )
        return counts_cache[phrasing]

    def cell_score(tables: Sequence[TopicKeywords], phrasing: bool) -> float:
        topics = [t.terms(top_n) for t in tables if len(t.terms(top_n)) >= 2]
        if not topics:
            return float("-inf")
        counts = doc_counts(phrasing)
        union = list(dict.fromkeys(w for t in topics for w in t))
        scores = [c_v(t, counts, union, coh_cfg).score for t in topics]
        return float(sum(scores) / len(scores))

    best: Optional[GridCell] = None
    table: list[GridCell] = []
    for mdf in mdfs:
        for sublinear in sublinear_values:
            for phrasing in phrasing_values:
                tf_cfg = TfIdfConfig(
                    max_document_frequency=mdf,
                    sublinear_tf=sublinear,
                    use_phrases=False,
                )
                base_docs = docs_phrased if phrasing else docs_plain
                tfidf_kw = cluster_tfidf(clustering, base_docs, tf_cfg, top_n=None)
                per_strategy = {
                    "tfidf": tfidf_kw,
                    "attention": attn_kw,
                    "combined": combined_tables(tfidf_kw, attn_kw),
                }
                for strategy in strategies:
                    score = cell_score(per_strategy[strategy], phrasing)
                    cell = GridCell(
                        strategy=strategy,
                        mdf=mdf,
                        sublinear=sublinear,
                        phrasing=phrasing,
                        score=score,
                    )
                    table.append(cell)
                    if best is None or cell.score > best.score:
                        best = cell
    return GridSearchResult(best=best, table=table)

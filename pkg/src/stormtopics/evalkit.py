"""Model agreement, human-evaluation sampling, Fleiss' kappa and scoring.

The evaluation protocol produces anonymized sample batches: the payload
shown to annotators carries no model identity and no intruder position;
those live in a separate answers file that never reaches the annotation UI.
"""

from __future__ import annotations

import json
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from stormtopics.errors import ValidationError
from stormtopics.kmeans import Clustering

logger = logging.getLogger(__name__)

UNSURE = "unsure"
INTRUDER_CATEGORIES = ("0", "1", "2", "3", "4", UNSURE)
INTERPRETABILITY = ("good", "neutral", "bad")
USEFULNESS_KEYWORD = ("useful", "average", "useless")
USEFULNESS_CLUSTER = ("useful", "useless")

_THREE_POINT = {"good": 1.0, "neutral": 0.5, "bad": 0.0,
                "useful": 1.0, "average": 0.5, "useless": 0.0}


@dataclass
class AgreementReport:
    agr_a_given_b: float
    agr_b_given_a: float
    symmetric: float


def agreement(a: Clustering, b: Clustering) -> AgreementReport:
    """Best-overlap agreement between two partitions of the same documents.

    For each non-empty cluster of one model, take the largest proportion of
    its documents found in any single cluster of the other model; average
    over clusters; the symmetric value averages both directions.
    """
    ids_a = set(a.assignments)
    ids_b = set(b.assignments)
    if ids_a != ids_b:
        diff = sorted(ids_a ^ ids_b)
        raise ValidationError(
            f"clusterings cover different documents ({len(diff)} mismatched, "
            f"first: {diff[:5]})"
        )

    def directed(x: Clustering, y: Clustering) -> float:
        overlap: Counter = Counter()
        size_x: Counter = Counter()
        for doc_id, cx in x.assignments.items():
            size_x[cx] += 1
            overlap[(cx, y.assignments[doc_id])] += 1
        best: dict[int, int] = {}
        for (cx, _), n in overlap.items():
            if n > best.get(cx, 0):
                best[cx] = n
        props = [best[cx] / size_x[cx] for cx in size_x]
        return float(np.mean(props))

    ab = directed(a, b)
    ba = directed(b, a)
    return AgreementReport(agr_a_given_b=ab, agr_b_given_a=ba, symmetric=(ab + ba) / 2)


@dataclass
class EvalSample:
    """One cluster-evaluation item: 4 in-topic documents + 1 intruder."""

    sample_id: str
    model_tag: str
    topic: int
    member_doc_ids: tuple[str, str, str, str]
    intruder_doc_id: str
    presented_order: tuple[str, str, str, str, str]

    def __post_init__(self):
        if len(self.member_doc_ids) != 4:
            raise ValidationError("a sample needs exactly 4 member documents")
        if sorted(self.presented_order) != sorted(
            (*self.member_doc_ids, self.intruder_doc_id)
        ):
            raise ValidationError("presented_order is not a permutation of the 5 ids")

    @property
    def intruder_position(self) -> int:
        return self.presented_order.index(self.intruder_doc_id)


@dataclass
class KeywordSample:
    """One keyword-evaluation item: a topic's top keywords."""

    sample_id: str
    model_tag: str
    topic: int
    keywords: tuple[str, ...]


def sample_intruder_sets(
    clustering: Clustering,
    sets_per_topic: int = 10,
    seed: int = 0,
    id_prefix: str = "c",
) -> list[EvalSample]:
    """Draw intruder-detection samples for every topic of a clustering.

    Members are drawn uniformly without replacement within the topic, the
    intruder uniformly over all documents outside it, and the presented
    order is a uniform shuffle. Topics with fewer than 4 documents are
    skipped with a warning.
    """
    all_ids = sorted(clustering.assignments)
    if len(all_ids) < 5:
        raise ValidationError("corpus too small for 4+1 sampling (need >= 5 docs)")
    rng = np.random.default_rng(seed)
    samples = []
    counter = 0
    for topic in range(clustering.k):
        inside = sorted(i for i in all_ids if clustering.assignments[i] == topic)
        outside = sorted(i for i in all_ids if clustering.assignments[i] != topic)
        if len(inside) < 4:
            logger.warning(
                "topic %d has only %d documents, skipping its samples",
                topic,
                len(inside),
            )
            continue
        if not outside:
            logger.warning("topic %d covers the whole corpus, no intruder pool", topic)
            continue
        for _ in range(sets_per_topic):
            members = tuple(rng.choice(len(inside), size=4, replace=False))
            member_ids = tuple(inside[m] for m in members)
            intruder = outside[int(rng.integers(len(outside)))]
            order = [*member_ids, intruder]
            perm = rng.permutation(5)
            presented = tuple(order[p] for p in perm)
            samples.append(
                EvalSample(
                    sample_id=f"{id_prefix}{counter:05d}",
                    model_tag=clustering.model_tag,
                    topic=topic,
                    member_doc_ids=member_ids,
                    intruder_doc_id=intruder,
                    presented_order=presented,
                )
            )
            counter += 1
    return samples


def make_keyword_samples(
    keyword_tables, model_tag: str, top_n: int = 10, id_prefix: str = "k"
) -> list[KeywordSample]:
    samples = []
    for i, tk in enumerate(keyword_tables):
        terms = tuple(tk.terms(top_n))
        if not terms:
            logger.warning("topic %d has no keywords, skipping its sample", tk.topic)
            continue
        samples.append(
            KeywordSample(
                sample_id=f"{id_prefix}{i:05d}",
                model_tag=model_tag,
                topic=tk.topic,
                keywords=terms,
            )
        )
    return samples


@dataclass
class AnnotationRecord:
    """One human judgment bound to an anonymized sample."""

    sample_id: str
    annotator_id: str
    task: str  # "keyword" | "cluster"
    interpretability: str  # good | neutral | bad
    usefulness: str  # keyword: useful|average|useless; cluster: useful|useless
    intruder_pick: Optional[str] = None  # cluster task: "0".."4" | "unsure"

    def __post_init__(self):
        if self.task not in ("keyword", "cluster"):
            raise ValidationError(f"unknown task {self.task!r}")
        if self.interpretability not in INTERPRETABILITY:
            raise ValidationError(
                f"invalid interpretability {self.interpretability!r}"
            )
        if self.task == "keyword":
            if self.usefulness not in USEFULNESS_KEYWORD:
                raise ValidationError(f"invalid usefulness {self.usefulness!r}")
            if self.intruder_pick is not None:
                raise ValidationError("keyword records carry no intruder pick")
        else:
            if self.usefulness not in USEFULNESS_CLUSTER:
                raise ValidationError(f"invalid usefulness {self.usefulness!r}")
            if self.intruder_pick not in INTRUDER_CATEGORIES:
                raise ValidationError(
                    f"invalid intruder pick {self.intruder_pick!r}"
                )

    def to_dict(self) -> dict:
        rec = {
            "sample_id": self.sample_id,
            "annotator_id": self.annotator_id,
            "task": self.task,
            "interpretability": self.interpretability,
            "usefulness": self.usefulness,
        }
        if self.task == "cluster":
            rec["intruder_pick"] = self.intruder_pick
        return rec

    @classmethod
    def from_dict(cls, raw: Mapping) -> "AnnotationRecord":
        try:
            return cls(
                sample_id=str(raw["sample_id"]),
                annotator_id=str(raw["annotator_id"]),
                task=str(raw["task"]),
                interpretability=str(raw["interpretability"]),
                usefulness=str(raw["usefulness"]),
                intruder_pick=(
                    str(raw["intruder_pick"]) if "intruder_pick" in raw else None
                ),
            )
        except KeyError as exc:
            raise ValidationError(f"annotation record missing field {exc}") from None


def fleiss_kappa(
    ratings: Mapping[str, Sequence[str]], categories: Sequence[str]
) -> float:
    """Fleiss' kappa over items rated by a fixed number of raters.

    ``ratings`` maps item id to the list of category labels it received;
    every item must have the same number ``r >= 2`` of ratings.
    """
    if not ratings:
        raise ValidationError("no ratings")
    cat_index = {c: i for i, c in enumerate(categories)}
    items = list(ratings.values())
    r = len(items[0])
    if r < 2:
        raise ValidationError("need at least 2 raters per item")
    n_items = len(items)
    table = np.zeros((n_items, len(categories)), dtype=np.float64)
    for i, labels in enumerate(items):
        if len(labels) != r:
            raise ValidationError(
                f"item {i} has {len(labels)} ratings, expected {r}"
            )
        for lab in labels:
            if lab not in cat_index:
                raise ValidationError(f"rating {lab!r} outside category set")
            table[i, cat_index[lab]] += 1
    p_i = ((table**2).sum(axis=1) - r) / (r * (r - 1))
    p_bar = float(p_i.mean())
    p_j = table.sum(axis=0) / (n_items * r)
    p_e = float((p_j**2).sum())
    if p_e == 1.0:
        if p_bar == 1.0:
            return 1.0
        raise ValidationError("expected agreement is 1 with imperfect agreement")
    return (p_bar - p_e) / (1.0 - p_e)


@dataclass
class ModelSummary:
    metric: str
    average_score: float
    topics_above_half: int
    kappa: Optional[float]


@dataclass
class EvalSummary:
    task: str
    # (model_tag, topic) -> metric -> mean score in [0, 1]
    per_topic: dict[tuple[str, int], dict[str, float]]
    # model_tag -> metric -> ModelSummary
    per_model: dict[str, dict[str, ModelSummary]]


def _topic_of(sample) -> tuple[str, int]:
    return (sample.model_tag, sample.topic)


def aggregate_scores(
    records: Sequence[AnnotationRecord],
    samples: Mapping[str, object],
    task: str,
) -> EvalSummary:
    """Aggregate annotation records into per-topic and per-model summaries.

    Scores rescale to [0, 1] (good/useful → 1, neutral/average → 0.5,
    bad/useless → 0; binary usefulness maps useful → 1, useless → 0), then
    average over annotators and samples per topic, and over topics per
    model. The cluster task also reports correct-intruder and unsure rates
    ('unsure' counts as incorrect and is reported separately). Kappas are
    computed per metric when every sample has the same rater count.
    """
    if task not in ("keyword", "cluster"):
        raise ValidationError(f"unknown task {task!r}")
    task_records = [r for r in records if r.task == task]
    for rec in task_records:
        if rec.sample_id not in samples:
            raise ValidationError(f"record references unknown sample {rec.sample_id!r}")

    by_topic: dict[tuple[str, int], dict[str, list[float]]] = defaultdict(
        lambda: defaultdict(list)
    )
    by_sample: dict[str, dict[str, list[str]]] = defaultdict(lambda: defaultdict(list))
    for rec in task_records:
        sample = samples[rec.sample_id]
        key = _topic_of(sample)
        by_topic[key]["interpretability"].append(_THREE_POINT[rec.interpretability])
        by_topic[key]["usefulness"].append(_THREE_POINT[rec.usefulness])
        by_sample[rec.sample_id]["interpretability"].append(rec.interpretability)
        by_sample[rec.sample_id]["usefulness"].append(rec.usefulness)
        if task == "cluster":
            correct = rec.intruder_pick == str(sample.intruder_position)
            by_topic[key]["correct_intruders"].append(1.0 if correct else 0.0)
            by_topic[key]["unknown_intruders"].append(
                1.0 if rec.intruder_pick == UNSURE else 0.0
            )
            by_sample[rec.sample_id]["intruder"].append(rec.intruder_pick)

    per_topic = {
        key: {metric: float(np.mean(vals)) for metric, vals in metrics.items()}
        for key, metrics in by_topic.items()
    }

    metric_categories = {
        "interpretability": INTERPRETABILITY,
        "usefulness": USEFULNESS_KEYWORD if task == "keyword" else USEFULNESS_CLUSTER,
        "intruder": INTRUDER_CATEGORIES,
    }
    kappa_metric_of = {
        "interpretability": "interpretability",
        "usefulness": "usefulness",
        "correct_intruders": "intruder",
    }

    models = sorted({m for m, _ in per_topic})
    per_model: dict[str, dict[str, ModelSummary]] = {}
    for model in models:
        topics = {t: v for (m, t), v in per_topic.items() if m == model}
        model_sample_ids = {
            sid
            for sid, s in samples.items()
            if getattr(s, "model_tag", None) == model and sid in by_sample
        }
        metrics_present = sorted({met for v in topics.values() for met in v})
        summaries = {}
        for metric in metrics_present:
            vals = [v[metric] for v in topics.values() if metric in v]
            kappa = None
            kap_metric = kappa_metric_of.get(metric)
            if kap_metric is not None:
                ratings = {
                    sid: by_sample[sid][kap_metric]
                    for sid in model_sample_ids
                    if by_sample[sid].get(kap_metric)
                }
                counts = {len(v) for v in ratings.values()}
                if ratings and len(counts) == 1 and counts.pop() >= 2:
                    kappa = fleiss_kappa(ratings, metric_categories[kap_metric])
            summaries[metric] = ModelSummary(
                metric=metric,
                average_score=float(np.mean(vals)),
                topics_above_half=sum(1 for v in vals if v > 0.5),
                kappa=kappa,
            )
        per_model[model] = summaries
    return EvalSummary(task=task, per_topic=per_topic, per_model=per_model)


# --- serialization -------------------------------------------------------


def sample_payload(sample) -> dict:
    """The annotator-facing payload: never includes model or intruder identity."""
    if isinstance(sample, EvalSample):
        return {
            "sample_id": sample.sample_id,
            "task": "cluster",
            "doc_ids": list(sample.presented_order),
        }
    return {
        "sample_id": sample.sample_id,
        "task": "keyword",
        "keywords": list(sample.keywords),
    }


def sample_answer(sample) -> dict:
    if isinstance(sample, EvalSample):
        return {
            "sample_id": sample.sample_id,
            "task": "cluster",
            "model_tag": sample.model_tag,
            "topic": sample.topic,
            "intruder_position": sample.intruder_position,
            "intruder_doc_id": sample.intruder_doc_id,
            "member_doc_ids": list(sample.member_doc_ids),
            "presented_order": list(sample.presented_order),
        }
    return {
        "sample_id": sample.sample_id,
        "task": "keyword",
        "model_tag": sample.model_tag,
        "topic": sample.topic,
        "keywords": list(sample.keywords),
    }


def load_answers(path) -> dict[str, object]:
    """Rebuild sample objects from an answers JSONL file, re-validating."""
    out: dict[str, object] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            raw = json.loads(line)
            if raw.get("task") == "cluster":
                sample = EvalSample(
                    sample_id=str(raw["sample_id"]),
                    model_tag=str(raw["model_tag"]),
                    topic=int(raw["topic"]),
                    member_doc_ids=tuple(str(i) for i in raw["member_doc_ids"]),
                    intruder_doc_id=str(raw["intruder_doc_id"]),
                    presented_order=tuple(str(i) for i in raw["presented_order"]),
                )
                if sample.intruder_position != int(raw["intruder_position"]):
                    raise ValidationError(
                        f"sample {sample.sample_id}: stored intruder position "
                        "disagrees with presented order"
                    )
            else:
                sample = KeywordSample(
                    sample_id=str(raw["sample_id"]),
                    model_tag=str(raw["model_tag"]),
                    topic=int(raw["topic"]),
                    keywords=tuple(str(k) for k in raw["keywords"]),
                )
            out[sample.sample_id] = sample
    return out


def load_records(path) -> list[AnnotationRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError:
                raise ValidationError(f"{path}: line {line_no}: invalid JSON") from None
            records.append(AnnotationRecord.from_dict(raw))
    return records

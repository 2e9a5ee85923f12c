from collections import Counter

import numpy as np
import pytest

from stormtopics.errors import ValidationError
from stormtopics.evalkit import (
    AnnotationRecord,
    EvalSample,
    KeywordSample,
    agreement,
    aggregate_scores,
    fleiss_kappa,
    load_answers,
    make_keyword_samples,
    sample_answer,
    sample_intruder_sets,
    sample_payload,
)
from stormtopics.keywords import TopicKeywords
from stormtopics.kmeans import Clustering


def clustering_of(assignments, k, tag="fte"):
    return Clustering(model_tag=tag, k=k, assignments=assignments, inertia=0.0)


class TestAgreement:
    def test_identical_clusterings_score_one(self):
        rng = np.random.default_rng(0)
        for trial in range(10):
            k = int(rng.integers(2, 8))
            assign = {f"d{i}": int(rng.integers(k)) for i in range(50)}
            a = clustering_of(assign, k)
            rep = agreement(a, a)
            assert rep.symmetric == 1.0
            assert rep.agr_a_given_b == 1.0 and rep.agr_b_given_a == 1.0

    def test_hand_computed_half(self):
        a = clustering_of({"1": 0, "2": 0, "3": 1, "4": 1}, 2, tag="A")
        b = clustering_of({"1": 0, "3": 0, "2": 1, "4": 1}, 2, tag="B")
        rep = agreement(a, b)
        assert rep.agr_a_given_b == 0.5
        assert rep.agr_b_given_a == 0.5
        assert rep.symmetric == 0.5

    def test_relabel_invariance(self):
        rng = np.random.default_rng(1)
        assign = {f"d{i}": int(rng.integers(4)) for i in range(60)}
        b_assign = {f"d{i}": int(rng.integers(4)) for i in range(60)}
        a = clustering_of(assign, 4)
        b = clustering_of(b_assign, 4)
        base = agreement(a, b)
        perm = [2, 3, 0, 1]
        a_perm = clustering_of({i: perm[t] for i, t in assign.items()}, 4)
        again = agreement(a_perm, b)
        assert again.symmetric == base.symmetric
        assert again.agr_a_given_b == base.agr_a_given_b

    def test_swap_symmetry(self):
        rng = np.random.default_rng(2)
        a = clustering_of({f"d{i}": int(rng.integers(3)) for i in range(40)}, 3)
        b = clustering_of({f"d{i}": int(rng.integers(5)) for i in range(40)}, 5)
        x = agreement(a, b)
        y = agreement(b, a)
        assert x.symmetric == y.symmetric
        assert x.agr_a_given_b == y.agr_b_given_a

    def test_differing_ids_error_lists_difference(self):
        a = clustering_of({"1": 0, "2": 0}, 1)
        b = clustering_of({"1": 0, "9": 0}, 1)
        with pytest.raises(ValidationError, match="9"):
            agreement(a, b)

    def test_empty_clusters_excluded(self):
        # cluster 1 of A is empty: average over the 1 non-empty cluster
        a = clustering_of({"1": 0, "2": 0}, 2)
        b = clustering_of({"1": 0, "2": 1}, 2)
        rep = agreement(a, b)
        assert rep.agr_a_given_b == 0.5
        assert rep.agr_b_given_a == 1.0


def two_topic_clustering(n_per=10):
    assign = {}
    for i in range(n_per):
        assign[f"a{i}"] = 0
        assign[f"b{i}"] = 1
    return clustering_of(assign, 2)


class TestSampling:
    def test_structure_and_counts(self):
        samples = sample_intruder_sets(two_topic_clustering(), sets_per_topic=10, seed=0)
        assert len(samples) == 20
        for s in samples:
            assert len(s.member_doc_ids) == 4
            assert len(set(s.presented_order)) == 5
            assert s.intruder_doc_id in s.presented_order
            assert s.intruder_doc_id not in s.member_doc_ids

    def test_members_inside_intruder_outside(self):
        clustering = two_topic_clustering()
        for s in sample_intruder_sets(clustering, seed=3):
            for m in s.member_doc_ids:
                assert clustering.assignments[m] == s.topic
            assert clustering.assignments[s.intruder_doc_id] != s.topic

    def test_deterministic_under_seed(self):
        c = two_topic_clustering()
        a = sample_intruder_sets(c, seed=5)
        b = sample_intruder_sets(c, seed=5)
        assert a == b

    def test_small_topic_skipped_with_warning(self, caplog):
        assign = {f"a{i}": 0 for i in range(10)}
        assign.update({"b0": 1, "b1": 1})
        c = clustering_of(assign, 2)
        with caplog.at_level("WARNING"):
            samples = sample_intruder_sets(c, seed=0)
        assert {s.topic for s in samples} == {0}
        assert any("topic 1" in r.message for r in caplog.records)

    def test_corpus_below_five_rejected(self):
        c = clustering_of({"a": 0, "b": 0, "c": 0, "d": 1}, 2)
        with pytest.raises(ValidationError):
            sample_intruder_sets(c)

    def test_intruder_uniform_over_outside(self):
        c = two_topic_clustering(n_per=8)
        outside = [f"b{i}" for i in range(8)]
        counts = Counter()
        trials = 4000
        for seed in range(trials):
            s = sample_intruder_sets(c, sets_per_topic=1, seed=seed)[0]
            assert s.topic == 0
            counts[s.intruder_doc_id] += 1
        expected = trials / len(outside)
        sigma = (trials * (1 / 8) * (7 / 8)) ** 0.5
        for doc in outside:
            assert abs(counts[doc] - expected) < 4 * sigma

    def test_payload_hides_model_and_intruder(self):
        for s in sample_intruder_sets(two_topic_clustering(), seed=1):
            payload = sample_payload(s)
            blob = str(payload)
            assert "model_tag" not in payload
            assert "intruder" not in blob
            assert "fte" not in blob

    def test_keyword_samples(self):
        tables = [
            TopicKeywords(0, "combined", [(f"w{i}", 1.0 - i / 20) for i in range(12)]),
            TopicKeywords(1, "combined", []),
        ]
        samples = make_keyword_samples(tables, "fte", top_n=10)
        assert len(samples) == 1
        assert len(samples[0].keywords) == 10
        payload = sample_payload(samples[0])
        assert payload["task"] == "keyword"
        assert "model_tag" not in payload


class TestFleissKappa:
    def test_unanimous_is_exactly_one(self):
        ratings = {f"s{i}": ["good", "good", "good"] for i in range(10)}
        assert fleiss_kappa(ratings, ["good", "neutral", "bad"]) == 1.0

    def test_two_item_hand_case(self):
        # direct-formula recomputation: P1=1, P2=0, Pbar=.5;
        # p_A=3/4, p_B=1/4, Pe=.625 -> kappa = -(1/8)/(3/8) = -1/3
        ratings = {"s1": ["A", "A"], "s2": ["A", "B"]}
        kappa = fleiss_kappa(ratings, ["A", "B"])
        assert abs(kappa - (-1 / 3)) < 1e-12

    def test_matches_statsmodels_oracle(self):
        statsmodels = pytest.importorskip("statsmodels.stats.inter_rater")
        rng = np.random.default_rng(4)
        cats = ["x", "y", "z"]
        ratings = {
            f"s{i}": [cats[int(j)] for j in rng.integers(0, 3, 4)] for i in range(25)
        }
        table = np.zeros((25, 3))
        for i, labs in enumerate(ratings.values()):
            for lab in labs:
                table[i, cats.index(lab)] += 1
        expected = statsmodels.fleiss_kappa(table, method="fleiss")
        assert abs(fleiss_kappa(ratings, cats) - expected) < 1e-12

    def test_independent_uniform_near_zero(self):
        rng = np.random.default_rng(5)
        cats = ["a", "b", "c"]
        ratings = {
            f"s{i}": [cats[int(j)] for j in rng.integers(0, 3, 4)]
            for i in range(1000)
        }
        assert abs(fleiss_kappa(ratings, cats)) <= 0.05

    def test_degenerate_single_category(self):
        ratings = {"s1": ["a", "a"], "s2": ["a", "a"]}
        assert fleiss_kappa(ratings, ["a"]) == 1.0

    def test_unequal_rater_counts_rejected(self):
        with pytest.raises(ValidationError):
            fleiss_kappa({"s1": ["a", "a"], "s2": ["a"]}, ["a", "b"])


def make_cluster_sample(sid, model, topic, intruder_pos):
    ids = [f"m{i}" for i in range(4)]
    intruder = "intr"
    order = list(ids)
    order.insert(intruder_pos, intruder)
    return EvalSample(
        sample_id=sid,
        model_tag=model,
        topic=topic,
        member_doc_ids=tuple(ids),
        intruder_doc_id=intruder,
        presented_order=tuple(order),
    )


class TestAggregate:
    def rec(self, sid, ann, interp, useful, pick=None, task="cluster"):
        return AnnotationRecord(
            sample_id=sid, annotator_id=ann, task=task,
            interpretability=interp, usefulness=useful, intruder_pick=pick,
        )

    def test_single_good_record(self):
        samples = {"s0": KeywordSample("s0", "fte", 0, ("a", "b"))}
        records = [self.rec("s0", "ann1", "good", "useful", task="keyword")]
        summary = aggregate_scores(records, samples, "keyword")
        assert summary.per_topic[("fte", 0)]["interpretability"] == 1.0
        assert summary.per_topic[("fte", 0)]["usefulness"] == 1.0

    def test_good_plus_bad_averages_half(self):
        samples = {"s0": KeywordSample("s0", "fte", 0, ("a", "b"))}
        records = [
            self.rec("s0", "ann1", "good", "useful", task="keyword"),
            self.rec("s0", "ann2", "bad", "useless", task="keyword"),
        ]
        summary = aggregate_scores(records, samples, "keyword")
        assert summary.per_topic[("fte", 0)]["interpretability"] == 0.5
        assert summary.per_topic[("fte", 0)]["usefulness"] == 0.5

    def test_unknown_sample_rejected(self):
        records = [self.rec("ghost", "a1", "good", "useful", task="keyword")]
        with pytest.raises(ValidationError, match="ghost"):
            aggregate_scores(records, {}, "keyword")

    def test_intruder_rates(self):
        samples = {
            "s0": make_cluster_sample("s0", "fte", 0, intruder_pos=2),
            "s1": make_cluster_sample("s1", "fte", 0, intruder_pos=4),
        }
        records = [
            self.rec("s0", "a1", "good", "useful", pick="2"),
            self.rec("s0", "a2", "good", "useful", pick="0"),
            self.rec("s1", "a1", "neutral", "useless", pick="unsure"),
            self.rec("s1", "a2", "bad", "useful", pick="4"),
        ]
        summary = aggregate_scores(records, samples, "cluster")
        topic = summary.per_topic[("fte", 0)]
        assert topic["correct_intruders"] == 0.5
        assert topic["unknown_intruders"] == 0.25

    def test_synthetic_recount_oracle(self):
        rng = np.random.default_rng(6)
        models = ["fte", "btm"]
        samples = {}
        sid = 0
        for model in models:
            for topic in range(3):
                for _ in range(4):
                    samples[f"s{sid}"] = make_cluster_sample(
                        f"s{sid}", model, topic, int(rng.integers(5))
                    )
                    sid += 1
        interps = ["good", "neutral", "bad"]
        uses = ["useful", "useless"]
        picks = ["0", "1", "2", "3", "4", "unsure"]
        records = []
        for s in samples.values():
            for ann in ("a1", "a2", "a3"):
                records.append(
                    self.rec(
                        s.sample_id, ann,
                        interps[int(rng.integers(3))],
                        uses[int(rng.integers(2))],
                        picks[int(rng.integers(6))],
                    )
                )
        summary = aggregate_scores(records, samples, "cluster")
        # brute-force recount for one model/topic pair
        scale = {"good": 1.0, "neutral": 0.5, "bad": 0.0}
        for model in models:
            for topic in range(3):
                relevant = [
                    r for r in records
                    if samples[r.sample_id].model_tag == model
                    and samples[r.sample_id].topic == topic
                ]
                expected_interp = np.mean([scale[r.interpretability] for r in relevant])
                expected_correct = np.mean(
                    [
                        1.0
                        if r.intruder_pick
                        == str(samples[r.sample_id].intruder_position)
                        else 0.0
                        for r in relevant
                    ]
                )
                got = summary.per_topic[(model, topic)]
                assert abs(got["interpretability"] - expected_interp) < 1e-12
                assert abs(got["correct_intruders"] - expected_correct) < 1e-12
        # model-level: mean of topic means, count of topics above 0.5
        for model in models:
            ms = summary.per_model[model]["interpretability"]
            topic_means = [
                summary.per_topic[(model, t)]["interpretability"] for t in range(3)
            ]
            assert abs(ms.average_score - np.mean(topic_means)) < 1e-12
            assert ms.topics_above_half == sum(1 for v in topic_means if v > 0.5)
            assert summary.per_model[model]["correct_intruders"].kappa is not None

    def test_records_validate_task_fields(self):
        with pytest.raises(ValidationError):
            AnnotationRecord("s", "a", "keyword", "good", "useful", intruder_pick="2")
        with pytest.raises(ValidationError):
            AnnotationRecord("s", "a", "cluster", "good", "average", intruder_pick="1")
        with pytest.raises(ValidationError):
            AnnotationRecord("s", "a", "cluster", "good", "useful", intruder_pick="9")


class TestAnswerRoundTrip:
    def test_answers_file_round_trip(self, tmp_path):
        import json

        cluster = make_cluster_sample("s0", "fte", 1, 3)
        keyword = KeywordSample("s1", "btm", 0, ("a", "b", "c"))
        path = tmp_path / "answers.jsonl"
        with open(path, "w") as fh:
            for s in (cluster, keyword):
                fh.write(json.dumps(sample_answer(s)) + "\n")
        loaded = load_answers(path)
        assert loaded["s0"].intruder_position == 3
        assert loaded["s0"].model_tag == "fte"
        assert loaded["s1"].keywords == ("a", "b", "c")

from collections import Counter

import numpy as np
import pytest

from stormtopics.corpus import Document
from stormtopics.errors import ValidationError
from stormtopics.prob_topics import (
    BtmModel,
    LdaModel,
    btm_assign,
    btm_fit,
    extract_biterms,
    lda_assign,
    lda_fit,
    topic_top_words,
)

VOCAB_A = [f"storm{i}" for i in range(10)]
VOCAB_B = [f"relief{i}" for i in range(10)]


def planted_docs(rng, n_docs=200, doc_len=20):
    """Two disjoint-vocabulary topics, half the corpus each."""
    docs = []
    truth = []
    for i in range(n_docs):
        side = i % 2
        pool = VOCAB_A if side == 0 else VOCAB_B
        toks = [pool[int(j)] for j in rng.integers(0, len(pool), doc_len)]
        docs.append(Document(f"d{i}", toks))
        truth.append(side)
    return docs, np.array(truth)


def side_purity(pred, truth):
    """Best accuracy over the two topic-label permutations."""
    pred = np.asarray(pred)
    direct = (pred == truth).mean()
    flipped = (pred == 1 - truth).mean()
    return max(direct, flipped)


class TestExtractBiterms:
    def test_all_pairs_within_large_window(self):
        doc = Document("1", ["a", "b", "c"])
        assert sorted(extract_biterms(doc, 15)) == [("a", "b"), ("a", "c"), ("b", "c")]

    def test_single_token_yields_nothing(self):
        assert extract_biterms(Document("1", ["a"]), 15) == []

    def test_window_limits_pair_distance(self):
        doc = Document("1", ["a", "b", "c", "d"])
        # window 2 pairs only adjacent positions
        assert sorted(extract_biterms(doc, 2)) == [("a", "b"), ("b", "c"), ("c", "d")]

    def test_duplicates_kept_and_unordered(self):
        doc = Document("1", ["b", "a", "b"])
        out = extract_biterms(doc, 15)
        assert out.count(("a", "b")) == 2
        assert out.count(("b", "b")) == 1

    def test_enumeration_oracle_short_docs(self):
        # docs no longer than the window: exactly n(n-1)/2 pairs, equal to
        # independent exhaustive enumeration
        for window in (2, 5, 15):
            for n in range(2, 11):
                toks = [f"w{i}" for i in range(n)]
                doc = Document("1", toks)
                got = Counter(extract_biterms(doc, window))
                expected = Counter()
                for i in range(n):
                    for j in range(i + 1, n):
                        if j - i < window:
                            a, b = sorted((toks[i], toks[j]))
                            expected[(a, b)] += 1
                assert got == expected
                if n <= window:
                    assert sum(got.values()) == n * (n - 1) // 2

    def test_window_below_two_rejected(self):
        with pytest.raises(ValidationError):
            extract_biterms(Document("1", ["a", "b"]), 1)


class TestLdaFit:
    def test_planted_recovery(self):
        rng = np.random.default_rng(0)
        docs, truth = planted_docs(rng)
        model = lda_fit(docs, k=2, passes=2, iterations=25, seed=1)
        tops = topic_top_words(model.phi, model.terms, 5)
        top_sets = [{w for w, _ in t} for t in tops]
        pools = [set(VOCAB_A), set(VOCAB_B)]
        assert (top_sets[0] <= pools[0] and top_sets[1] <= pools[1]) or (
            top_sets[0] <= pools[1] and top_sets[1] <= pools[0]
        )
        pred = model.theta.argmax(axis=1)
        assert side_purity(pred, truth) >= 0.95

    def test_k1_gives_smoothed_unigram(self):
        docs = [Document("1", ["a", "a", "b"]), Document("2", ["b", "c"])]
        model = lda_fit(docs, k=1, beta=0.01, passes=1, iterations=3, seed=0)
        counts = {"a": 2, "b": 2, "c": 1}
        for term, stats in zip(model.terms, model.phi[0]):
            expected = (counts[term] + 0.01) / (5 + 3 * 0.01)
            assert abs(stats - expected) < 1e-12

    def test_bitwise_determinism(self):
        rng = np.random.default_rng(4)
        docs, _ = planted_docs(rng, n_docs=40, doc_len=8)
        a = lda_fit(docs, k=3, passes=1, iterations=20, seed=11)
        b = lda_fit(docs, k=3, passes=1, iterations=20, seed=11)
        assert a.phi.tobytes() == b.phi.tobytes()
        assert a.theta.tobytes() == b.theta.tobytes()

    def test_debug_count_consistency(self):
        rng = np.random.default_rng(5)
        docs, _ = planted_docs(rng, n_docs=20, doc_len=6)
        lda_fit(docs, k=2, passes=1, iterations=5, seed=0, debug=True)

    def test_distribution_invariants(self):
        rng = np.random.default_rng(6)
        docs, _ = planted_docs(rng, n_docs=30, doc_len=7)
        model = lda_fit(docs, k=4, passes=1, iterations=10, seed=2)
        np.testing.assert_allclose(model.phi.sum(axis=1), 1.0, atol=1e-9)
        np.testing.assert_allclose(model.theta.sum(axis=1), 1.0, atol=1e-9)
        assert (model.phi >= 0).all() and (model.theta >= 0).all()

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValidationError):
            lda_fit([], k=2)
        with pytest.raises(ValidationError):
            lda_fit([Document("1", [])], k=2)


class TestBtmFit:
    def test_planted_recovery(self):
        rng = np.random.default_rng(1)
        docs, _ = planted_docs(rng, n_docs=100, doc_len=10)
        biterms = [b for d in docs for b in extract_biterms(d, 15)]
        model = btm_fit(biterms, k=2, alpha=1.0, iterations=60, seed=3)
        # biterm purity: argmax p(z|b) vs the planted side of the biterm
        correct = Counter()
        for a, b in model.biterms:
            side = 0 if model.terms[a] in VOCAB_A else 1
            pz = model.tau * model.phi[:, a] * model.phi[:, b]
            correct[(side, int(pz.argmax()))] += 1
        n = sum(correct.values())
        direct = (correct[(0, 0)] + correct[(1, 1)]) / n
        flipped = (correct[(0, 1)] + correct[(1, 0)]) / n
        assert max(direct, flipped) >= 0.95

    def test_single_repeated_biterm_concentrates(self):
        # the conditional reduces to p(z) ∝ n_z + alpha here, so the chain
        # locks onto one of the two symmetric modes when alpha is small
        biterms = [("a", "b")] * 50
        model = btm_fit(biterms, k=2, alpha=0.05, iterations=100, seed=1)
        assert model.tau.max() > 0.9

    def test_determinism(self):
        biterms = [("a", "b"), ("b", "c"), ("a", "c")] * 10
        x = btm_fit(biterms, k=2, iterations=20, seed=5)
        y = btm_fit(biterms, k=2, iterations=20, seed=5)
        assert x.phi.tobytes() == y.phi.tobytes()
        assert x.tau.tobytes() == y.tau.tobytes()

    def test_invariants(self):
        biterms = [("a", "b"), ("b", "c"), ("c", "d")] * 5
        model = btm_fit(biterms, k=3, iterations=10, seed=1)
        np.testing.assert_allclose(model.phi.sum(axis=1), 1.0, atol=1e-9)
        assert abs(model.tau.sum() - 1.0) < 1e-9
        for a, b in model.biterms:
            assert a <= b

    def test_no_biterms_names_cause(self):
        with pytest.raises(ValidationError, match="fewer than 2"):
            btm_fit([], k=2)


class TestAssignment:
    def make_lda(self, phi, tau, terms):
        phi = np.asarray(phi, dtype=np.float64)
        k = phi.shape[0]
        return LdaModel(
            k=k, alpha=1.0, beta=0.01, phi=phi,
            theta=np.zeros((0, k)), passes=1, iterations=1,
            terms=tuple(terms), doc_ids=(), tau=np.asarray(tau, dtype=np.float64),
            seed=0,
        )

    def make_btm(self, phi, tau, terms, window=15):
        phi = np.asarray(phi, dtype=np.float64)
        return BtmModel(
            k=phi.shape[0], window=window, alpha=1.0, beta=0.005, phi=phi,
            tau=np.asarray(tau, dtype=np.float64), biterms=(),
            terms=tuple(terms), iterations=1, seed=0,
        )

    def test_lda_planted_doc(self):
        rng = np.random.default_rng(2)
        docs, truth = planted_docs(rng, n_docs=60, doc_len=12)
        model = lda_fit(docs, k=2, passes=1, iterations=30, seed=7)
        pred = [lda_assign(model, d).topic for d in docs]
        assert side_purity(pred, truth) >= 0.95

    def test_lda_empty_doc_degenerate(self):
        model = self.make_lda([[0.5, 0.5], [0.5, 0.5]], [0.5, 0.5], ["a", "b"])
        res = lda_assign(model, Document("1", []))
        assert res.topic == 0 and res.degenerate

    def test_lda_uniform_phi_full_tie(self):
        model = self.make_lda(
            np.full((3, 4), 0.25), np.full(3, 1 / 3), ["a", "b", "c", "d"]
        )
        res = lda_assign(model, Document("1", ["a", "c", "d"]))
        assert res.topic == 0 and not res.degenerate

    def test_btm_planted_doc(self):
        rng = np.random.default_rng(3)
        docs, truth = planted_docs(rng, n_docs=60, doc_len=10)
        biterms = [b for d in docs for b in extract_biterms(d, 15)]
        model = btm_fit(biterms, k=2, alpha=1.0, iterations=50, seed=2)
        pred = [btm_assign(model, d).topic for d in docs]
        assert side_purity(pred, truth) >= 0.95

    def test_btm_single_word_fallback(self):
        phi = [[0.9, 0.1], [0.1, 0.9]]
        model = self.make_btm(phi, [0.5, 0.5], ["x", "a"])
        res = btm_assign(model, Document("1", ["a"]))
        assert res.topic == 1 and not res.degenerate

    def test_btm_empty_doc_degenerate(self):
        model = self.make_btm([[0.5, 0.5], [0.5, 0.5]], [0.5, 0.5], ["a", "b"])
        res = btm_assign(model, Document("1", []))
        assert res.topic == 0 and res.degenerate


class TestTopWords:
    def test_single_topic_identity(self):
        phi = np.array([[0.5, 0.3, 0.2]])
        top = topic_top_words(phi, ["a", "b", "c"], 3)
        assert top == [[("a", 0.5), ("b", 0.3), ("c", 0.2)]]

    def test_matches_full_sort_oracle(self):
        rng = np.random.default_rng(4)
        phi = rng.random((5, 30))
        phi /= phi.sum(axis=1, keepdims=True)
        terms = [f"w{i}" for i in range(30)]
        top = topic_top_words(phi, terms, 30)
        for z in range(5):
            expected = sorted(
                range(30), key=lambda i: (-phi[z][i], i)
            )
            assert [t for t, _ in top[z]] == [terms[i] for i in expected]

    def test_ties_break_by_term_id(self):
        phi = np.array([[0.25, 0.25, 0.5]])
        top = topic_top_words(phi, ["b", "a", "c"], 3)
        assert [t for t, _ in top[0]] == ["c", "b", "a"]

    def test_m_zero_rejected(self):
        with pytest.raises(ValidationError):
            topic_top_words(np.array([[1.0]]), ["a"], 0)

    def test_m_clamped_to_vocab(self):
        top = topic_top_words(np.array([[0.6, 0.4]]), ["a", "b"], 10)
        assert len(top[0]) == 2

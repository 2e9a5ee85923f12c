import hashlib
import json
import os

import pytest

from stormtopics.cli import main


def run(argv):
    return main([str(a) for a in argv])


def dir_hashes(root):
    """name -> sha256 for every file under root (relative names)."""
    out = {}
    for base, _, files in os.walk(root):
        for name in files:
            full = os.path.join(base, name)
            rel = os.path.relpath(full, root)
            out[rel] = hashlib.sha256(open(full, "rb").read()).hexdigest()
    return out


def read_csv(path):
    with open(path, encoding="utf-8") as fh:
        header, *rows = [line.rstrip("\n") for line in fh if line.strip()]
    return header.split(","), [r.split(",") for r in rows]


@pytest.fixture()
def pipeline(tmp_path, fixture_tweets_path, fixture_bundle_dir):
    """Run the full pipeline once into tmp_path and return the directories."""

    def run_pipeline(root, seed=11):
        d = {name: os.path.join(root, name) for name in (
            "pre", "clu", "lda", "kw", "coh", "agr", "sam", "sco", "rep")}
        assert run(["preprocess", "--corpus", fixture_tweets_path,
                    "--out", d["pre"]]) == 0
        docs = os.path.join(d["pre"], "documents.jsonl")
        assert run(["cluster", "--bundle", fixture_bundle_dir, "--docs", docs,
                    "--k", "4", "--n-init", "3", "--seed", str(seed),
                    "--out", d["clu"]]) == 0
        assert run(["topics", "--model", "lda", "--docs", docs, "--k", "4",
                    "--passes", "2", "--iterations", "10", "--seed", str(seed),
                    "--out", d["lda"]]) == 0
        clustering = os.path.join(d["clu"], "clustering.json")
        assert run(["keywords", "--strategy", "combined",
                    "--clustering", clustering, "--docs", docs,
                    "--bundle", fixture_bundle_dir, "--top-n", "10",
                    "--out", d["kw"]]) == 0
        kw_json = os.path.join(d["kw"], "keywords.json")
        assert run(["coherence", "--metric", "cv", "--docs", docs,
                    "--keywords", kw_json, "--seed", str(seed),
                    "--out", d["coh"]]) == 0
        assert run(["agree", clustering,
                    os.path.join(d["lda"], "clustering.json"),
                    "--out", d["agr"]]) == 0
        assert run(["sample-eval", "--corpus", fixture_tweets_path,
                    "--clustering", clustering, "--keywords", kw_json,
                    "--sets-per-topic", "3", "--seed", str(seed),
                    "--out", d["sam"]]) == 0
        # synthesize deterministic annotation records from the answers file
        records_path = os.path.join(root, "records.jsonl")
        with open(os.path.join(d["sam"], "answers.jsonl")) as fh:
            answers = [json.loads(line) for line in fh if line.strip()]
        with open(records_path, "w") as fh:
            for i, ans in enumerate(answers):
                for j, ann in enumerate(("ann1", "ann2")):
                    rec = {
                        "sample_id": ans["sample_id"],
                        "annotator_id": ann,
                        "task": ans["task"],
                        "interpretability": ["good", "neutral", "bad"][(i + j) % 3],
                    }
                    if ans["task"] == "cluster":
                        rec["usefulness"] = ["useful", "useless"][(i + j) % 2]
                        rec["intruder_pick"] = (
                            str(ans["intruder_position"]) if (i + j) % 2 == 0
                            else "unsure"
                        )
                    else:
                        rec["usefulness"] = ["useful", "average", "useless"][(i + j) % 3]
                    fh.write(json.dumps(rec, sort_keys=True) + "\n")
        assert run(["score-eval", "--records", records_path,
                    "--answers", os.path.join(d["sam"], "answers.jsonl"),
                    "--out", d["sco"]]) == 0
        assert run(["report", d["coh"], d["sco"], "--out", d["rep"]]) == 0
        return d

    return run_pipeline


class TestPipeline:
    def test_full_pipeline_runs_and_outputs_exist(self, tmp_path, pipeline):
        d = pipeline(tmp_path / "run")
        assert os.path.exists(os.path.join(d["pre"], "documents.jsonl"))
        assert os.path.exists(os.path.join(d["clu"], "clustering.json"))
        assert os.path.exists(os.path.join(d["kw"], "keywords.csv"))
        assert os.path.exists(os.path.join(d["coh"], "coherence_models.csv"))
        assert os.path.exists(os.path.join(d["sam"], "samples.jsonl"))
        assert os.path.exists(os.path.join(d["sco"], "figure3.csv"))
        assert os.path.exists(os.path.join(d["rep"], "report.md"))
        # every stage wrote its run.json and left no .partial files behind
        for path in d.values():
            if os.path.basename(path) == "agr":
                continue
            assert os.path.exists(os.path.join(path, "run.json"))
        for base, _, files in os.walk(tmp_path):
            assert not [f for f in files if f.endswith(".partial")]

    def test_two_seeded_runs_byte_identical(self, tmp_path, pipeline):
        pipeline(tmp_path / "one", seed=42)
        pipeline(tmp_path / "two", seed=42)
        assert dir_hashes(tmp_path / "one") == dir_hashes(tmp_path / "two")

    def test_keyword_csv_shape(self, tmp_path, pipeline):
        d = pipeline(tmp_path / "run")
        header, rows = read_csv(os.path.join(d["kw"], "keywords.csv"))
        assert header == ["topic", "strategy", "rank", "term", "score"]
        assert all(r[1] == "combined" for r in rows)
        topics = {r[0] for r in rows}
        assert topics == {"0", "1", "2", "3"}

    def test_samples_payload_contains_no_answers(self, tmp_path, pipeline):
        d = pipeline(tmp_path / "run")
        with open(os.path.join(d["sam"], "samples.jsonl")) as fh:
            for line in fh:
                payload = json.loads(line)
                assert "model_tag" not in payload
                assert "intruder_position" not in payload
                assert "topic" not in payload

    def test_summary_csvs(self, tmp_path, pipeline):
        d = pipeline(tmp_path / "run")
        header, rows = read_csv(os.path.join(d["sco"], "summary_cluster.csv"))
        assert header == [
            "model", "metric", "average_score", "topics_above_half", "fleiss_kappa"
        ]
        metrics = {r[1] for r in rows}
        assert {"interpretability", "usefulness",
                "correct_intruders", "unknown_intruders"} <= metrics
        header, rows = read_csv(os.path.join(d["sco"], "figure3.csv"))
        assert header == ["model", "task", "metric", "topic", "score"]


class TestSubcommands:
    def test_agree_identity_is_one(self, tmp_path, capsys):
        clustering = {
            "model_tag": "fte", "k": 2,
            "assignments": {"a": 0, "b": 1}, "inertia": 0.0, "seed": 1,
        }
        p = tmp_path / "c.json"
        p.write_text(json.dumps(clustering))
        assert run(["agree", p, p]) == 0
        out = capsys.readouterr().out
        assert "symmetric=1.0000" in out

    def test_coherence_k_sweep_rows(self, tmp_path, fixture_tweets_path):
        pre = tmp_path / "pre"
        assert run(["preprocess", "--corpus", fixture_tweets_path, "--out", pre]) == 0
        out = tmp_path / "coh"
        assert run(["coherence", "--metric", "cv",
                    "--docs", pre / "documents.jsonl",
                    "--models", "lda", "--k-sweep", "5..15",
                    "--passes", "1", "--iterations", "2",
                    "--seed", "0", "--out", out]) == 0
        header, rows = read_csv(out / "coherence_models.csv")
        assert header == ["model", "k", "metric", "score"]
        assert len(rows) == 11
        assert [r[1] for r in rows] == [str(k) for k in range(5, 16)]

    def test_missing_input_exits_1(self, tmp_path):
        assert run(["preprocess", "--corpus", tmp_path / "nope.jsonl",
                    "--out", tmp_path / "o"]) == 1

    def test_invalid_records_exit_1(self, tmp_path):
        answers = tmp_path / "answers.jsonl"
        answers.write_text("")
        records = tmp_path / "records.jsonl"
        records.write_text('{"sample_id": "x"}\n')
        assert run(["score-eval", "--records", records, "--answers", answers,
                    "--out", tmp_path / "o"]) == 1

    def test_seed_env_fallback(self, tmp_path, fixture_tweets_path,
                               fixture_bundle_dir, monkeypatch):
        pre = tmp_path / "pre"
        assert run(["preprocess", "--corpus", fixture_tweets_path, "--out", pre]) == 0
        docs = pre / "documents.jsonl"
        monkeypatch.setenv("STORMTOPICS_SEED", "99")
        a = tmp_path / "a"
        assert run(["cluster", "--bundle", fixture_bundle_dir, "--docs", docs,
                    "--k", "4", "--n-init", "2", "--out", a]) == 0
        b = tmp_path / "b"
        assert run(["cluster", "--bundle", fixture_bundle_dir, "--docs", docs,
                    "--k", "4", "--n-init", "2", "--seed", "99", "--out", b]) == 0
        assert (a / "clustering.json").read_text() == (b / "clustering.json").read_text()

    def test_config_file_with_flag_override(self, tmp_path, fixture_tweets_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"preprocess": {"min_token_len": 4}}))
        out1 = tmp_path / "o1"
        assert run(["preprocess", "--corpus", fixture_tweets_path,
                    "--config", cfg, "--out", out1]) == 0
        run_info = json.loads((out1 / "run.json").read_text())
        assert run_info["config"]["preprocess"]["min_token_len"] == 4
        out2 = tmp_path / "o2"
        assert run(["preprocess", "--corpus", fixture_tweets_path,
                    "--config", cfg, "--min-token-len", "2", "--out", out2]) == 0
        run_info = json.loads((out2 / "run.json").read_text())
        assert run_info["config"]["preprocess"]["min_token_len"] == 2

    def test_btm_topics_and_cross_model_agreement(self, tmp_path,
                                                  fixture_tweets_path):
        pre = tmp_path / "pre"
        assert run(["preprocess", "--corpus", fixture_tweets_path, "--out", pre]) == 0
        docs = pre / "documents.jsonl"
        btm = tmp_path / "btm"
        assert run(["topics", "--model", "btm", "--docs", docs, "--k", "4",
                    "--passes", "2", "--iterations", "10", "--window", "15",
                    "--seed", "3", "--out", btm]) == 0
        lda = tmp_path / "lda"
        assert run(["topics", "--model", "lda", "--docs", docs, "--k", "4",
                    "--passes", "2", "--iterations", "10",
                    "--seed", "3", "--out", lda]) == 0
        model = json.loads((btm / "btm_model.json").read_text())
        assert model["kind"] == "btm" and model["window"] == 15
        agr = tmp_path / "agr"
        assert run(["agree", btm / "clustering.json", lda / "clustering.json",
                    "--out", agr]) == 0
        report = json.loads((agr / "agreement.json").read_text())
        assert 0.0 < report["symmetric"] <= 1.0
        assert report["model_a"] == "btm" and report["model_b"] == "lda"

    def test_grid_strategy(self, tmp_path, fixture_tweets_path, fixture_bundle_dir):
        pre = tmp_path / "pre"
        assert run(["preprocess", "--corpus", fixture_tweets_path, "--out", pre]) == 0
        docs = pre / "documents.jsonl"
        clu = tmp_path / "clu"
        assert run(["cluster", "--bundle", fixture_bundle_dir, "--docs", docs,
                    "--k", "4", "--n-init", "2", "--seed", "1", "--out", clu]) == 0
        out = tmp_path / "grid"
        assert run(["keywords", "--strategy", "grid",
                    "--clustering", clu / "clustering.json", "--docs", docs,
                    "--bundle", fixture_bundle_dir, "--out", out]) == 0
        header, rows = read_csv(out / "grid.csv")
        assert header == ["strategy", "mdf", "sublinear", "phrasing", "score"]
        assert len(rows) == 60
        best = json.loads((out / "grid_best.json").read_text())
        assert best["strategy"] in ("tfidf", "attention", "combined")

"""Command-line pipeline: preprocess, cluster, topics, keywords, coherence,
agree, sample-eval, score-eval, report.

Every subcommand is re-runnable from persisted files, writes a ``run.json``
with the resolved configuration and input checksums, and is deterministic
given the same inputs and seed. Outputs are written atomically: a file is
first materialized under a ``.partial`` suffix and renamed only when
complete. Exit codes: 0 success, 1 validation error, 2 internal error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import traceback

import numpy as np

from stormtopics import corpus as corpus_mod
from stormtopics import coherence as coh_mod
from stormtopics import evalkit, keywords, kmeans, prob_topics
from stormtopics import embedding_io
from stormtopics.errors import StormtopicsError, ValidationError

SEED_ENV = "STORMTOPICS_SEED"
DEFAULT_K_SWEEP = "5..15"


def _write_atomic(path: str, text: str):
    tmp = path + ".partial"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _hash_inputs(paths) -> list[dict[str, str]]:
    # keyed by basename, not full path, so reruns in other directories
    # produce byte-identical run manifests
    out = []
    for p in paths:
        if os.path.isdir(p):
            for name in sorted(os.listdir(p)):
                full = os.path.join(p, name)
                if os.path.isfile(full):
                    out.append({"name": name, "sha256": _sha256(full)})
        elif os.path.isfile(p):
            out.append({"name": os.path.basename(p), "sha256": _sha256(p)})
    return sorted(out, key=lambda d: (d["name"], d["sha256"]))


def _write_run_json(out_dir: str, command: str, config: dict, inputs):
    payload = {
        "command": command,
        "config": config,
        "inputs": _hash_inputs(inputs),
    }
    _write_atomic(
        os.path.join(out_dir, "run.json"),
        json.dumps(payload, sort_keys=True, indent=2) + "\n",
    )


def _resolve_seed(args, file_cfg: dict) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    if "seed" in file_cfg:
        return int(file_cfg["seed"])
    env = os.environ.get(SEED_ENV)
    return int(env) if env else 0


def _load_config_file(args) -> dict:
    path = getattr(args, "config", None)
    if not path:
        return {}
    with open(path, encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValidationError(f"{path}: config must be a JSON object")
    return cfg


def _cfg(args, file_cfg: dict, section: str, key: str, default):
    """Flag wins over config file wins over default."""
    flag = getattr(args, key.replace("-", "_"), None)
    if flag is not None:
        return flag
    return file_cfg.get(section, {}).get(key, default)


def _parse_k_sweep(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        ks = list(range(int(lo), int(hi) + 1))
    else:
        ks = [int(text)]
    if not ks:
        raise ValidationError(f"empty k sweep {text!r}")
    return ks


def _fmt(x: float) -> str:
    return repr(float(x))


def _ensure_out(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _preprocess_config(args, file_cfg) -> corpus_mod.PreprocessConfig:
    return corpus_mod.PreprocessConfig(
        hashtag_policy=_cfg(
            args, file_cfg, "preprocess", "hashtag_policy",
            corpus_mod.STRIP_SYMBOL_KEEP_BODY,
        ),
        mention_policy=_cfg(
            args, file_cfg, "preprocess", "mention_policy",
            corpus_mod.STRIP_SYMBOL_KEEP_BODY,
        ),
        stopword_list_id=_cfg(
            args, file_cfg, "preprocess", "stopword_list_id", "english-v1"
        ),
        min_token_len=int(
            _cfg(args, file_cfg, "preprocess", "min_token_len", 2)
        ),
    )


# --- subcommands ----------------------------------------------------------


def cmd_preprocess(args) -> int:
    file_cfg = _load_config_file(args)
    out = _ensure_out(args)
    cfg = _preprocess_config(args, file_cfg)
    tweets = corpus_mod.load_tweets(args.corpus, format=args.format)
    docs = corpus_mod.tokenize_all(tweets, cfg)
    _write_atomic(os.path.join(out, "documents.jsonl"), corpus_mod.dump_documents(docs))
    _write_run_json(
        out,
        "preprocess",
        {"preprocess": cfg.__dict__ | {"extra_stopwords": list(cfg.extra_stopwords)},
         "format": args.format},
        [args.corpus],
    )
    print(f"preprocess: {len(tweets)} tweets -> {len(docs)} documents")
    return 0


def cmd_cluster(args) -> int:
    file_cfg = _load_config_file(args)
    out = _ensure_out(args)
    seed = _resolve_seed(args, file_cfg)
    docs = corpus_mod.load_documents(args.docs)
    bundle = embedding_io.read_bundle(args.bundle)
    aligned = embedding_io.align(bundle, docs)
    if aligned.missing_in_bundle:
        print(
            f"warning: {len(aligned.missing_in_bundle)} documents missing "
            "from the bundle",
            file=sys.stderr,
        )
    ids = [d.id for d in docs if d.id in aligned.index]
    points = bundle.vectors[[aligned.index[i] for i in ids]].astype(np.float64)
    cfg = kmeans.KMeansConfig(
        k=int(_cfg(args, file_cfg, "kmeans", "k", 9)),
        n_init=int(_cfg(args, file_cfg, "kmeans", "n_init", 10)),
        max_iter=int(_cfg(args, file_cfg, "kmeans", "max_iter", 300)),
        tol=float(_cfg(args, file_cfg, "kmeans", "tol", 1e-4)),
        seed=seed,
        normalize=bool(_cfg(args, file_cfg, "kmeans", "normalize", False)),
        algorithm=_cfg(args, file_cfg, "kmeans", "algorithm", "elkan"),
    )
    tag = "fte" if bundle.manifest.source_tag == "finetuned" else "bert"
    clustering = kmeans.fit(points, cfg, ids=ids, model_tag=tag)
    _write_atomic(os.path.join(out, "clustering.json"), clustering.to_json() + "\n")
    _write_run_json(
        out,
        "cluster",
        {"kmeans": cfg.__dict__, "model_tag": tag},
        [args.docs, args.bundle],
    )
    print(f"cluster: k={cfg.k} inertia={clustering.inertia:.6g} model={tag}")
    return 0


def cmd_topics(args) -> int:
    file_cfg = _load_config_file(args)
    out = _ensure_out(args)
    seed = _resolve_seed(args, file_cfg)
    docs = corpus_mod.load_documents(args.docs)
    section = args.model
    k = int(_cfg(args, file_cfg, section, "k", 9))
    alpha = _cfg(args, file_cfg, section, "alpha", None)
    alpha = float(alpha) if alpha is not None else None
    passes = int(_cfg(args, file_cfg, section, "passes", 10))
    iterations = int(_cfg(args, file_cfg, section, "iterations", 100))
    if args.model == "lda":
        beta = float(_cfg(args, file_cfg, section, "beta", 0.01))
        model = prob_topics.lda_fit(
            docs, k, alpha=alpha, beta=beta, passes=passes,
            iterations=iterations, seed=seed,
        )
    else:
        beta = float(_cfg(args, file_cfg, section, "beta", 0.005))
        window = int(_cfg(args, file_cfg, section, "window", 15))
        biterms = [
            b for d in docs for b in prob_topics.extract_biterms(d, window)
        ]
        model = prob_topics.btm_fit(
            biterms, k, alpha=alpha, beta=beta,
            iterations=passes * iterations, seed=seed, window=window,
        )
    prob_topics.save_model(model, out, f"{args.model}_model")
    clustering, degenerate = prob_topics.assign_corpus(model, docs, args.model)
    _write_atomic(os.path.join(out, "clustering.json"), clustering.to_json() + "\n")
    if degenerate:
        _write_atomic(
            os.path.join(out, "degenerate_docs.json"),
            json.dumps(sorted(degenerate)) + "\n",
        )
    _write_run_json(
        out,
        "topics",
        {
            section: {
                "k": k, "alpha": alpha, "beta": beta, "passes": passes,
                "iterations": iterations, "seed": seed,
            }
        },
        [args.docs],
    )
    print(f"topics: {args.model} k={k} ({len(degenerate)} degenerate docs)")
    return 0


def _keyword_rows(tables, model_tag: str):
    return {
        "model_tag": model_tag,
        "topics": [
            {"topic": t.topic, "strategy": t.strategy,
             "ranked": [[term, score] for term, score in t.ranked]}
            for t in tables
        ],
    }


def _keywords_csv(tables) -> str:
    lines = ["topic,strategy,rank,term,score"]
    for t in tables:
        for rank, (term, score) in enumerate(t.ranked, start=1):
            lines.append(f"{t.topic},{t.strategy},{rank},{term},{_fmt(score)}")
    return "\n".join(lines) + "\n"


def load_keyword_file(path):
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    tables = [
        keywords.TopicKeywords(
            topic=int(t["topic"]),
            strategy=str(t["strategy"]),
            ranked=[(str(term), float(score)) for term, score in t["ranked"]],
        )
        for t in raw["topics"]
    ]
    return str(raw["model_tag"]), tables


def cmd_keywords(args) -> int:
    file_cfg = _load_config_file(args)
    out = _ensure_out(args)
    docs = corpus_mod.load_documents(args.docs)
    clustering = kmeans.Clustering.from_json(
        open(args.clustering, encoding="utf-8").read()
    )
    pre_cfg = _preprocess_config(args, file_cfg)
    top_n = args.top_n
    inputs = [args.docs, args.clustering]

    if args.strategy == "grid":
        if not args.bundle:
            raise ValidationError("grid search requires --bundle")
        bundle = embedding_io.read_bundle(args.bundle)
        inputs.append(args.bundle)
        result = keywords.grid_search(
            clustering, docs, bundle, k_for_selection=clustering.k, pre_cfg=pre_cfg
        )
        lines = ["strategy,mdf,sublinear,phrasing,score"]
        for cell in result.table:
            lines.append(
                f"{cell.strategy},{cell.mdf},{int(cell.sublinear)},"
                f"{int(cell.phrasing)},{_fmt(cell.score)}"
            )
        _write_atomic(os.path.join(out, "grid.csv"), "\n".join(lines) + "\n")
        _write_atomic(
            os.path.join(out, "grid_best.json"),
            json.dumps(result.best.__dict__, sort_keys=True) + "\n",
        )
        _write_run_json(out, "keywords", {"strategy": "grid"}, inputs)
        b = result.best
        print(
            f"keywords: grid best {b.strategy} mdf={b.mdf} "
            f"sublinear={b.sublinear} phrasing={b.phrasing} c_v={b.score:.4f}"
        )
        return 0

    tf_cfg = keywords.TfIdfConfig(
        max_document_frequency=float(_cfg(args, file_cfg, "tfidf", "mdf", 1.0)),
        sublinear_tf=bool(_cfg(args, file_cfg, "tfidf", "sublinear", False)),
        use_phrases=bool(_cfg(args, file_cfg, "tfidf", "phrases", False)),
    )
    if args.strategy == "tfidf":
        tables = keywords.cluster_tfidf(clustering, docs, tf_cfg, top_n=top_n)
    elif args.strategy == "attention":
        if not args.bundle:
            raise ValidationError("attention keywords require --bundle")
        bundle = embedding_io.read_bundle(args.bundle)
        inputs.append(args.bundle)
        tables = keywords.attention_scores(clustering, bundle, pre_cfg, top_n=top_n)
    else:  # combined
        if not args.bundle:
            raise ValidationError("combined keywords require --bundle")
        bundle = embedding_io.read_bundle(args.bundle)
        inputs.append(args.bundle)
        tf_tables = keywords.cluster_tfidf(clustering, docs, tf_cfg, top_n=None)
        at_tables = keywords.attention_scores(clustering, bundle, pre_cfg, top_n=None)
        tables = keywords.combined_tables(tf_tables, at_tables)
        if top_n is not None:
            for t in tables:
                t.ranked = t.ranked[:top_n]
    _write_atomic(os.path.join(out, "keywords.csv"), _keywords_csv(tables))
    _write_atomic(
        os.path.join(out, "keywords.json"),
        json.dumps(_keyword_rows(tables, clustering.model_tag), sort_keys=True) + "\n",
    )
    _write_run_json(
        out, "keywords",
        {"strategy": args.strategy, "tfidf": tf_cfg.__dict__, "top_n": top_n},
        inputs,
    )
    print(f"keywords: {args.strategy} over {clustering.k} topics")
    return 0


def cmd_coherence(args) -> int:
    file_cfg = _load_config_file(args)
    out = _ensure_out(args)
    seed = _resolve_seed(args, file_cfg)
    docs = corpus_mod.load_documents(args.docs)
    metric = {"cv": "c_v", "cnpmi": "c_npmi"}[args.metric]
    cfg = coh_mod.CoherenceConfig(
        window=int(_cfg(args, file_cfg, "coherence", "window", 10)),
        epsilon=float(_cfg(args, file_cfg, "coherence", "epsilon", 1e-12)),
        gamma=float(_cfg(args, file_cfg, "coherence", "gamma", 1.0)),
        topn=int(_cfg(args, file_cfg, "coherence", "topn", 10)),
        context_scope=_cfg(
            args, file_cfg, "coherence", "context_scope", coh_mod.TOPIC_UNION
        ),
    )
    topic_rows = ["model,k,metric,topic,score"]
    model_rows = ["model,k,metric,score"]
    inputs = [args.docs]

    def add(model_tag: str, k: int, topics: list[list[str]]):
        mc = coh_mod.model_coherence(topics, docs, metric, cfg)
        for i, ts in enumerate(mc.per_topic):
            topic_rows.append(f"{model_tag},{k},{args.metric},{i},{_fmt(ts.score)}")
        model_rows.append(f"{model_tag},{k},{args.metric},{_fmt(mc.score)}")

    if args.keywords:
        for path in args.keywords:
            inputs.append(path)
            model_tag, tables = load_keyword_file(path)
            topics = [t.terms(cfg.topn) for t in tables if len(t.terms(cfg.topn)) >= 2]
            add(model_tag, len(tables), topics)
    if args.models:
        ks = _parse_k_sweep(args.k_sweep)
        passes = int(_cfg(args, file_cfg, "topics", "passes", 10))
        iterations = int(_cfg(args, file_cfg, "topics", "iterations", 100))
        window = int(_cfg(args, file_cfg, "topics", "window", 15))
        for model_name in args.models:
            for k in ks:
                if model_name == "lda":
                    model = prob_topics.lda_fit(
                        docs, k, passes=passes, iterations=iterations, seed=seed
                    )
                else:
                    biterms = [
                        b for d in docs
                        for b in prob_topics.extract_biterms(d, window)
                    ]
                    model = prob_topics.btm_fit(
                        biterms, k, iterations=passes * iterations,
                        seed=seed, window=window,
                    )
                tops = prob_topics.topic_top_words(model.phi, model.terms, cfg.topn)
                add(model_name, k, [[w for w, _ in t] for t in tops])
    if not args.keywords and not args.models:
        raise ValidationError("coherence needs --keywords files and/or --models")

    _write_atomic(
        os.path.join(out, "coherence_topics.csv"), "\n".join(topic_rows) + "\n"
    )
    _write_atomic(
        os.path.join(out, "coherence_models.csv"), "\n".join(model_rows) + "\n"
    )
    _write_run_json(
        out, "coherence",
        {"metric": args.metric, "coherence": cfg.__dict__,
         "k_sweep": args.k_sweep if args.models else None, "seed": seed},
        inputs,
    )
    print(f"coherence: {len(model_rows) - 1} model rows ({args.metric})")
    return 0


def cmd_agree(args) -> int:
    a = kmeans.Clustering.from_json(open(args.clustering_a, encoding="utf-8").read())
    b = kmeans.Clustering.from_json(open(args.clustering_b, encoding="utf-8").read())
    report = evalkit.agreement(a, b)
    payload = {
        "model_a": a.model_tag,
        "model_b": b.model_tag,
        "agr_a_given_b": report.agr_a_given_b,
        "agr_b_given_a": report.agr_b_given_a,
        "symmetric": report.symmetric,
    }
    if args.out:
        out = _ensure_out(args)
        _write_atomic(
            os.path.join(out, "agreement.json"),
            json.dumps(payload, sort_keys=True) + "\n",
        )
        _write_run_json(
            out, "agree", {}, [args.clustering_a, args.clustering_b]
        )
    print(
        f"agreement {a.model_tag}~{b.model_tag}: symmetric={report.symmetric:.4f} "
        f"(a|b={report.agr_a_given_b:.4f}, b|a={report.agr_b_given_a:.4f})"
    )
    return 0


def cmd_sample_eval(args) -> int:
    file_cfg = _load_config_file(args)
    out = _ensure_out(args)
    seed = _resolve_seed(args, file_cfg)
    tweets = {t.id: t for t in corpus_mod.load_tweets(args.corpus, format=args.format)}
    samples: list = []
    inputs = [args.corpus]
    for path in args.clustering or []:
        inputs.append(path)
        clustering = kmeans.Clustering.from_json(open(path, encoding="utf-8").read())
        samples.extend(
            evalkit.sample_intruder_sets(
                clustering, sets_per_topic=args.sets_per_topic, seed=seed
            )
        )
    for path in args.keywords or []:
        inputs.append(path)
        model_tag, tables = load_keyword_file(path)
        samples.extend(evalkit.make_keyword_samples(tables, model_tag))
    if not samples:
        raise ValidationError("nothing to sample: pass --clustering and/or --keywords")

    # Shuffle across models before numbering so file order leaks nothing.
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(samples))
    samples = [samples[i] for i in order]
    for i, s in enumerate(samples):
        s.sample_id = f"s{i:05d}"

    payload_lines = []
    answer_lines = []
    for s in samples:
        payload = evalkit.sample_payload(s)
        if payload["task"] == "cluster":
            missing = [i for i in payload["doc_ids"] if i not in tweets]
            if missing:
                raise ValidationError(
                    f"sample {s.sample_id} references unknown tweet ids {missing[:3]}"
                )
            payload = {
                "sample_id": payload["sample_id"],
                "task": "cluster",
                "items": [
                    {"position": pos, "text": tweets[i].text}
                    for pos, i in enumerate(payload["doc_ids"])
                ],
            }
        payload_lines.append(json.dumps(payload, ensure_ascii=False, sort_keys=True))
        answer_lines.append(
            json.dumps(evalkit.sample_answer(s), ensure_ascii=False, sort_keys=True)
        )
    _write_atomic(os.path.join(out, "samples.jsonl"), "\n".join(payload_lines) + "\n")
    _write_atomic(os.path.join(out, "answers.jsonl"), "\n".join(answer_lines) + "\n")
    _write_run_json(
        out, "sample-eval",
        {"sets_per_topic": args.sets_per_topic, "seed": seed},
        inputs,
    )
    print(f"sample-eval: {len(samples)} samples written")
    return 0


def _summary_csv(summary: evalkit.EvalSummary) -> str:
    lines = ["model,metric,average_score,topics_above_half,fleiss_kappa"]
    for model in sorted(summary.per_model):
        for metric in sorted(summary.per_model[model]):
            ms = summary.per_model[model][metric]
            kappa = "" if ms.kappa is None else _fmt(ms.kappa)
            lines.append(
                f"{model},{metric},{_fmt(ms.average_score)},"
                f"{ms.topics_above_half},{kappa}"
            )
    return "\n".join(lines) + "\n"


def cmd_score_eval(args) -> int:
    out = _ensure_out(args)
    answers = evalkit.load_answers(args.answers)
    records = []
    for path in args.records:
        records.extend(evalkit.load_records(path))
    figure_rows = ["model,task,metric,topic,score"]
    wrote = []
    for task in ("keyword", "cluster"):
        task_records = [r for r in records if r.task == task]
        if not task_records:
            continue
        summary = evalkit.aggregate_scores(task_records, answers, task)
        name = f"summary_{task}.csv"
        _write_atomic(os.path.join(out, name), _summary_csv(summary))
        wrote.append(name)
        for (model, topic), metrics in sorted(summary.per_topic.items()):
            for metric, score in sorted(metrics.items()):
                figure_rows.append(f"{model},{task},{metric},{topic},{_fmt(score)}")
    if not wrote:
        raise ValidationError("no annotation records found")
    _write_atomic(os.path.join(out, "figure3.csv"), "\n".join(figure_rows) + "\n")
    _write_run_json(
        out, "score-eval", {}, list(args.records) + [args.answers]
    )
    print(f"score-eval: wrote {', '.join(wrote)} and figure3.csv")
    return 0


def cmd_report(args) -> int:
    out = _ensure_out(args)
    collected = []
    for run_dir in args.run_dirs:
        if not os.path.isdir(run_dir):
            raise ValidationError(f"not a directory: {run_dir}")
        for name in sorted(os.listdir(run_dir)):
            if name.endswith(".csv"):
                src = os.path.join(run_dir, name)
                base = os.path.basename(os.path.normpath(run_dir))
                dst_name = f"{base}__{name}"
                with open(src, encoding="utf-8") as fh:
                    _write_atomic(os.path.join(out, dst_name), fh.read())
                collected.append(dst_name)
    lines = ["# stormtopics report", "", "Collected tables:", ""]
    lines += [f"- {name}" for name in collected]
    _write_atomic(os.path.join(out, "report.md"), "\n".join(lines) + "\n")
    _write_run_json(out, "report", {}, args.run_dirs)
    print(f"report: collected {len(collected)} tables")
    return 0


# --- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stormtopics",
        description="Topic modelling and evaluation for short crisis texts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--config", help="JSON config file; flags override it")
        p.add_argument("--out", required=True, help="output directory")
        if seed:
            p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("preprocess", help="tokenize a raw tweet file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    p.add_argument("--hashtag-policy", dest="hashtag_policy", default=None)
    p.add_argument("--mention-policy", dest="mention_policy", default=None)
    p.add_argument("--min-token-len", dest="min_token_len", type=int, default=None)
    common(p, seed=False)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("cluster", help="K-Means over an embedding bundle")
    p.add_argument("--bundle", required=True)
    p.add_argument("--docs", required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--n-init", dest="n_init", type=int, default=None)
    p.add_argument("--max-iter", dest="max_iter", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--normalize", action="store_const", const=True, default=None)
    p.add_argument("--algorithm", choices=("elkan", "lloyd"), default=None)
    common(p)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("topics", help="train an LDA or BTM baseline")
    p.add_argument("--model", choices=("lda", "btm"), required=True)
    p.add_argument("--docs", required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--passes", type=int, default=None)
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--window", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_topics)

    p = sub.add_parser("keywords", help="extract topic keywords")
    p.add_argument(
        "--strategy", choices=("tfidf", "attention", "combined", "grid"),
        required=True,
    )
    p.add_argument("--clustering", required=True)
    p.add_argument("--docs", required=True)
    p.add_argument("--bundle", default=None)
    p.add_argument("--mdf", type=float, default=None)
    p.add_argument("--sublinear", action="store_const", const=True, default=None)
    p.add_argument("--phrases", action="store_const", const=True, default=None)
    p.add_argument("--top-n", dest="top_n", type=int, default=None)
    common(p, seed=False)
    p.set_defaults(func=cmd_keywords)

    p = sub.add_parser("coherence", help="score topics with C_V or C_NPMI")
    p.add_argument("--metric", choices=("cv", "cnpmi"), required=True)
    p.add_argument("--docs", required=True, help="reference corpus (documents.jsonl)")
    p.add_argument("--keywords", nargs="*", default=[], help="keyword JSON files")
    p.add_argument(
        "--models", nargs="*", default=[], choices=("lda", "btm"),
        help="train these baselines over --k-sweep and score them",
    )
    p.add_argument("--k-sweep", dest="k_sweep", default=DEFAULT_K_SWEEP)
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--topn", type=int, default=None)
    p.add_argument("--passes", type=int, default=None)
    p.add_argument("--iterations", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_coherence)

    p = sub.add_parser("agree", help="model agreement between two clusterings")
    p.add_argument("clustering_a")
    p.add_argument("clustering_b")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_agree)

    p = sub.add_parser("sample-eval", help="draw anonymized evaluation samples")
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    p.add_argument("--clustering", nargs="*", default=[])
    p.add_argument("--keywords", nargs="*", default=[])
    p.add_argument("--sets-per-topic", dest="sets_per_topic", type=int, default=10)
    common(p)
    p.set_defaults(func=cmd_sample_eval)

    p = sub.add_parser("score-eval", help="score annotation records")
    p.add_argument("--records", nargs="+", required=True)
    p.add_argument("--answers", required=True)
    common(p, seed=False)
    p.set_defaults(func=cmd_score_eval)

    p = sub.add_parser("report", help="collate result CSVs from run directories")
    p.add_argument("run_dirs", nargs="+")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (StormtopicsError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception:
        traceback.print_exc()
        return 2


def console_main():
    sys.exit(main())


if __name__ == "__main__":
    console_main()

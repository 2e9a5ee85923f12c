"""Bundle export: mean-pooled tweet embeddings + [CLS] attention per word.

Per tweet:

* embedding = mean of the last hidden states over non-padding positions
  (special tokens included by default; ``include_special=False`` excludes
  them);
* attention per surface token = the classification token's last-layer
  attention row, averaged over heads, then averaged over the token's
  subword positions. Surface tokens are the tokenizer's word-level units;
  their strings are recovered from character offsets.

Files follow the stormtopics bundle interchange format exactly
(``manifest.json`` / ``vectors.f32`` / ``attention.jsonl``); tweets longer
than the encoder limit are truncated and recorded in ``export_log.json``
(which is not part of the bundle).
"""

from __future__ import annotations

import hashlib
import json
import os

import numpy as np
import torch

from crisis_exporter.encoder import load_checkpoint, load_encoder

MANIFEST_VERSION = 1


def read_tweets_jsonl(path) -> list[tuple[str, str]]:
    out = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            rec = json.loads(line)
            tid, text = str(rec["id"]), str(rec["text"])
            if tid in seen:
                raise ValueError(f"{path}: line {line_no}: duplicate id {tid!r}")
            seen.add(tid)
            out.append((tid, text))
    if not out:
        raise ValueError(f"{path}: no tweets")
    return out


def _word_attention(encoding, index, text, cls_attn_row):
    """Group subword positions by word and average the attention row."""
    word_ids = encoding.word_ids(index)
    offsets = encoding["offset_mapping"][index].tolist()
    spans: dict[int, list[int]] = {}
    bounds: dict[int, tuple[int, int]] = {}
    for pos, wid in enumerate(word_ids):
        if wid is None:
            continue
        spans.setdefault(wid, []).append(pos)
        start, end = offsets[pos]
        if wid in bounds:
            lo, hi = bounds[wid]
            bounds[wid] = (min(lo, start), max(hi, end))
        else:
            bounds[wid] = (start, end)
    tokens = []
    scores = []
    for wid in sorted(spans):
        lo, hi = bounds[wid]
        tokens.append(text[lo:hi])
        scores.append(float(np.mean([cls_attn_row[p] for p in spans[wid]])))
    return tokens, scores


def export_bundle(
    tweets_path,
    out_dir,
    checkpoint: str | None = None,
    base_model_id: str = "bert-base-uncased",
    batch_size: int = 32,
    max_length: int = 64,
    include_special: bool = True,
    seed: int = 0,
) -> dict:
    """Encode tweets and write a bundle directory; returns the manifest dict."""
    torch.manual_seed(seed)
    if checkpoint:
        tokenizer, encoder, _ = load_checkpoint(checkpoint)
        source_tag = "finetuned"
    else:
        tokenizer, encoder = load_encoder(base_model_id, seed=seed)
        source_tag = "pretrained"
    encoder.eval()
    model_max = getattr(encoder.config, "max_position_embeddings", max_length)
    max_length = min(max_length, model_max)

    tweets = read_tweets_jsonl(tweets_path)
    vectors = np.zeros((len(tweets), encoder.config.hidden_size), dtype=np.float32)
    attention_rows: list[tuple[list[str], list[float]]] = []
    truncated: list[str] = []

    with torch.no_grad():
        for start in range(0, len(tweets), batch_size):
            batch = tweets[start : start + batch_size]
            texts = [t for _, t in batch]
            enc = tokenizer(
                texts,
                padding=True,
                truncation=True,
                max_length=max_length,
                return_offsets_mapping=True,
                return_special_tokens_mask=True,
                return_tensors="pt",
            )
            out = encoder(
                input_ids=enc["input_ids"],
                attention_mask=enc["attention_mask"],
                output_attentions=True,
            )
            hidden = out.last_hidden_state  # (b, s, h)
            mask = enc["attention_mask"].to(hidden.dtype)
            if not include_special:
                mask = mask * (1.0 - enc["special_tokens_mask"].to(hidden.dtype))
            pooled = (hidden * mask.unsqueeze(-1)).sum(dim=1) / mask.sum(
                dim=1, keepdim=True
            )
            cls_attn = out.attentions[-1][:, :, 0, :].mean(dim=1)  # (b, s)
            for i, (tid, text) in enumerate(batch):
                vectors[start + i] = pooled[i].numpy().astype(np.float32)
                tokens, scores = _word_attention(enc, i, text, cls_attn[i].tolist())
                attention_rows.append((tokens, scores))
                n_words = len(
                    tokenizer(text, truncation=False)["input_ids"]
                )
                if n_words > max_length:
                    truncated.append(tid)

    os.makedirs(out_dir, exist_ok=True)
    vectors_path = os.path.join(out_dir, "vectors.f32")
    np.ascontiguousarray(vectors, dtype="<f4").tofile(vectors_path)
    sha = hashlib.sha256(open(vectors_path, "rb").read()).hexdigest()
    manifest = {
        "version": MANIFEST_VERSION,
        "n_tweets": len(tweets),
        "dim": int(encoder.config.hidden_size),
        "tweet_ids": [tid for tid, _ in tweets],
        "sha256": sha,
        "source_tag": source_tag,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(out_dir, "attention.jsonl"), "w", encoding="utf-8") as fh:
        for (tid, _), (tokens, scores) in zip(tweets, attention_rows):
            fh.write(
                json.dumps(
                    {"id": tid, "tokens": tokens, "attn": scores},
                    ensure_ascii=False,
                    sort_keys=True,
                )
            )
            fh.write("\n")
    with open(os.path.join(out_dir, "export_log.json"), "w", encoding="utf-8") as fh:
        json.dump(
            {"truncated_ids": truncated, "max_length": max_length,
             "include_special": include_special, "seed": seed},
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    return manifest

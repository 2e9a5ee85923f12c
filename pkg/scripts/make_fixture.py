#!/usr/bin/env python3
"""Regenerate the committed 200-tweet fixture corpus and embedding bundle.

Deterministic: running it twice produces byte-identical files. The bundle
mimics what the exporter emits (mean-pooled tweet vectors + per-surface-token
attention) with a simple planted 4-theme structure so clustering, keyword
extraction and coherence behave sensibly on it.
"""

import json
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from stormtopics.embedding_io import write_bundle  # noqa: E402

SEED = 20200117
N_TWEETS = 200
DIM = 16

THEMES = {
    "weather": [
        "snow", "blizzard", "wind", "forecast", "snowfall", "gusts",
        "meteorologist", "temperature", "drifting", "whiteout",
    ],
    "power": [
        "outage", "power", "hydro", "electricity", "restored", "crews",
        "blackout", "grid", "generator", "heat",
    ],
    "roads": [
        "road", "traffic", "plow", "driving", "highway", "closed",
        "impassable", "shovel", "sidewalk", "parking",
    ],
    "help": [
        "volunteers", "donation", "foodbank", "shelter", "groceries",
        "neighbours", "rescue", "helping", "supplies", "kindness",
    ],
}
FILLER = ["storm", "city", "today", "morning", "update", "stay", "safe", "big"]
HASHTAGS = ["#nlwx", "#nlstorm2020", "#snowmaggedon2020", "#nltraffic"]


def main():
    rng = np.random.default_rng(SEED)
    theme_names = list(THEMES)
    out_dir = os.path.join(
        os.path.dirname(__file__), "..", "tests", "fixtures", "tiny200"
    )
    os.makedirs(out_dir, exist_ok=True)

    tweets = []
    theme_of = []
    for i in range(N_TWEETS):
        theme = theme_names[i % len(theme_names)]
        theme_of.append(theme)
        pool = THEMES[theme]
        n_theme = int(rng.integers(3, 6))
        n_fill = int(rng.integers(1, 4))
        words = [pool[int(j)] for j in rng.integers(0, len(pool), n_theme)]
        words += [FILLER[int(j)] for j in rng.integers(0, len(FILLER), n_fill)]
        order = rng.permutation(len(words))
        words = [words[int(j)] for j in order]
        parts = list(words)
        if rng.random() < 0.5:
            parts.append(HASHTAGS[int(rng.integers(len(HASHTAGS)))])
        if rng.random() < 0.3:
            parts.append(f"https://t.co/{''.join(chr(97 + int(c)) for c in rng.integers(0, 26, 6))}")
        if rng.random() < 0.2:
            parts.insert(0, f"@user{int(rng.integers(50)):02d}")
        text = " ".join(parts)
        tweets.append(
            {
                "id": f"t{i:04d}",
                "text": text,
                "author": f"u{int(rng.integers(80)):03d}",
                "created_at": f"2020-01-{17 + i % 5:02d}T{i % 24:02d}:00:00Z",
            }
        )

    with open(os.path.join(out_dir, "tweets.jsonl"), "w", encoding="utf-8") as fh:
        for t in tweets:
            fh.write(json.dumps(t, ensure_ascii=False, sort_keys=True))
            fh.write("\n")

    # Vectors: theme block (4 dims each) + noise, float32.
    vectors = np.zeros((N_TWEETS, DIM), dtype=np.float64)
    for i, theme in enumerate(theme_of):
        block = theme_names.index(theme)
        vectors[i, block * 4 : block * 4 + 4] = 3.0
    vectors += rng.normal(scale=0.4, size=vectors.shape)
    vectors = vectors.astype(np.float32)

    theme_words = {w for pool in THEMES.values() for w in pool}
    attention = []
    for i, t in enumerate(tweets):
        toks = t["text"].split()
        scores = rng.random(len(toks)) * 0.1
        for j, tok in enumerate(toks):
            body = tok.lstrip("#@").lower()
            if body in theme_words:
                scores[j] += 0.5 + 0.2 * rng.random()
        attention.append((toks, [float(s) for s in scores]))

    write_bundle(
        os.path.join(out_dir, "bundle"),
        [t["id"] for t in tweets],
        vectors,
        attention,
        source_tag="finetuned",
    )
    print(f"fixture written to {out_dir}")


if __name__ == "__main__":
    main()

"""Bit-exact interchange format for tweet embeddings and attention scores.

A bundle is a directory with three files:

* ``manifest.json`` — UTF-8 JSON: ``version`` (currently 1), ``n_tweets``,
  ``dim``, ``tweet_ids`` (ordered), ``sha256`` (hex digest of the vector
  file), ``source_tag`` (``finetuned`` | ``pretrained``).
* ``vectors.f32`` — raw little-endian IEEE-754 float32, row-major,
  ``n_tweets x dim``, no header.
* ``attention.jsonl`` — one object per tweet in manifest order:
  ``{"id": ..., "tokens": [...], "attn": [...]}`` with equal-length arrays
  of surface tokens and non-negative attention scores (already averaged
  over heads and subwords by the producer).

Vectors stay float32 in memory so a write/read round trip is bit-exact;
downstream arithmetic upcasts to float64.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from stormtopics.corpus import Document
from stormtopics.errors import ValidationError

MANIFEST_VERSION = 1
SOURCE_TAGS = ("finetuned", "pretrained")


class BundleError(ValidationError):
    """Base for embedding-bundle violations."""


class UnknownVersionError(BundleError):
    pass


class ChecksumMismatchError(BundleError):
    pass


class LengthMismatchError(BundleError):
    pass


class NonFiniteValueError(BundleError):
    pass


class InvalidAttentionError(BundleError):
    pass


@dataclass(frozen=True)
class BundleManifest:
    version: int
    n_tweets: int
    dim: int
    tweet_ids: tuple[str, ...]
    sha256: str
    source_tag: str


@dataclass
class EmbeddingBundle:
    manifest: BundleManifest
    vectors: np.ndarray  # (n_tweets, dim) float32
    # id -> (tokens, scores), insertion order equals manifest order
    attention: dict[str, tuple[tuple[str, ...], np.ndarray]]

    @property
    def tweet_ids(self) -> tuple[str, ...]:
        return self.manifest.tweet_ids

    @property
    def dim(self) -> int:
        return self.manifest.dim

    def row(self, tweet_id: str) -> np.ndarray:
        idx = self.manifest.tweet_ids.index(tweet_id)
        return self.vectors[idx]


@dataclass
class AlignResult:
    index: dict[str, int]  # corpus id -> bundle row
    missing_in_bundle: list[str]
    missing_in_corpus: list[str]


def _sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def read_bundle(directory) -> EmbeddingBundle:
    """Read and fully validate a bundle directory.

    Raises a distinct :class:`BundleError` subclass for each violated
    invariant (version, checksum, lengths, non-finite values, attention).
    """
    manifest_path = os.path.join(directory, "manifest.json")
    vectors_path = os.path.join(directory, "vectors.f32")
    attention_path = os.path.join(directory, "attention.jsonl")
    for p in (manifest_path, vectors_path, attention_path):
        if not os.path.exists(p):
            raise BundleError(f"missing bundle file: {p}")

    with open(manifest_path, encoding="utf-8") as fh:
        raw = json.load(fh)
    version = raw.get("version")
    if version != MANIFEST_VERSION:
        raise UnknownVersionError(
            f"unknown manifest version {version!r} (expected {MANIFEST_VERSION})"
        )
    try:
        manifest = BundleManifest(
            version=version,
            n_tweets=int(raw["n_tweets"]),
            dim=int(raw["dim"]),
            tweet_ids=tuple(str(t) for t in raw["tweet_ids"]),
            sha256=str(raw["sha256"]),
            source_tag=str(raw["source_tag"]),
        )
    except (KeyError, TypeError) as exc:
        raise BundleError(f"manifest missing field: {exc}") from None
    if manifest.source_tag not in SOURCE_TAGS:
        raise BundleError(f"unknown source_tag {manifest.source_tag!r}")
    if len(manifest.tweet_ids) != manifest.n_tweets:
        raise LengthMismatchError(
            f"manifest lists {len(manifest.tweet_ids)} tweet_ids "
            f"but n_tweets={manifest.n_tweets}"
        )
    if len(set(manifest.tweet_ids)) != manifest.n_tweets:
        raise BundleError("manifest tweet_ids contain duplicates")

    digest = _sha256_file(vectors_path)
    if digest != manifest.sha256:
        raise ChecksumMismatchError(
            f"vectors.f32 sha256 {digest} != manifest sha256 {manifest.sha256}"
        )
    data = np.fromfile(vectors_path, dtype="<f4")
    expected = manifest.n_tweets * manifest.dim
    if data.size != expected:
        raise LengthMismatchError(
            f"vectors.f32 holds {data.size} float32 values, expected {expected}"
        )
    vectors = data.reshape(manifest.n_tweets, manifest.dim)
    if not np.isfinite(vectors).all():
        bad = int(np.argwhere(~np.isfinite(vectors))[0][0])
        raise NonFiniteValueError(
            f"non-finite vector entry in row {bad} (id {manifest.tweet_ids[bad]})"
        )

    attention: dict[str, tuple[tuple[str, ...], np.ndarray]] = {}
    with open(attention_path, encoding="utf-8") as fh:
        rows = [json.loads(line) for line in fh if line.strip()]
    if len(rows) != manifest.n_tweets:
        raise LengthMismatchError(
            f"attention.jsonl has {len(rows)} rows, expected {manifest.n_tweets}"
        )
    for i, rec in enumerate(rows):
        rid = str(rec.get("id"))
        if rid != manifest.tweet_ids[i]:
            raise InvalidAttentionError(
                f"attention row {i} id {rid!r} does not match manifest "
                f"id {manifest.tweet_ids[i]!r}"
            )
        toks = rec.get("tokens")
        attn = rec.get("attn")
        if not isinstance(toks, list) or not isinstance(attn, list):
            raise InvalidAttentionError(f"attention row {i}: tokens/attn not arrays")
        if len(toks) != len(attn):
            raise LengthMismatchError(
                f"attention row {i}: {len(toks)} tokens vs {len(attn)} scores"
            )
        scores = np.asarray(attn, dtype=np.float64)
        if scores.size and (not np.isfinite(scores).all() or (scores < 0).any()):
            raise InvalidAttentionError(
                f"attention row {i} (id {rid!r}): scores must be finite and >= 0"
            )
        attention[rid] = (tuple(str(t) for t in toks), scores)

    return EmbeddingBundle(manifest=manifest, vectors=vectors, attention=attention)


def write_bundle(
    directory,
    tweet_ids: Sequence[str],
    vectors: np.ndarray,
    attention: Iterable[tuple[Sequence[str], Sequence[float]]],
    source_tag: str,
) -> BundleManifest:
    """Write a bundle directory; the canonical writer for producers and fixtures.

    ``vectors`` is cast to float32; ``attention`` yields (tokens, scores)
    pairs in ``tweet_ids`` order.
    """
    if source_tag not in SOURCE_TAGS:
        raise ValidationError(f"unknown source_tag {source_tag!r}")
    vec = np.ascontiguousarray(np.asarray(vectors), dtype="<f4")
    if vec.ndim != 2 or vec.shape[0] != len(tweet_ids):
        raise ValidationError(
            f"vectors shape {vec.shape} does not match {len(tweet_ids)} tweet ids"
        )
    os.makedirs(directory, exist_ok=True)
    vectors_path = os.path.join(directory, "vectors.f32")
    vec.tofile(vectors_path)
    manifest = BundleManifest(
        version=MANIFEST_VERSION,
        n_tweets=vec.shape[0],
        dim=vec.shape[1],
        tweet_ids=tuple(str(t) for t in tweet_ids),
        sha256=_sha256_file(vectors_path),
        source_tag=source_tag,
    )
    with open(os.path.join(directory, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(
            {
                "version": manifest.version,
                "n_tweets": manifest.n_tweets,
                "dim": manifest.dim,
                "tweet_ids": list(manifest.tweet_ids),
                "sha256": manifest.sha256,
                "source_tag": manifest.source_tag,
            },
            fh,
            sort_keys=True,
        )
        fh.write("\n")
    with open(os.path.join(directory, "attention.jsonl"), "w", encoding="utf-8") as fh:
        for tid, (toks, scores) in zip(tweet_ids, attention):
            fh.write(
                json.dumps(
                    {
                        "id": str(tid),
                        "tokens": [str(t) for t in toks],
                        "attn": [float(s) for s in scores],
                    },
                    ensure_ascii=False,
                    sort_keys=True,
                )
            )
            fh.write("\n")
    return manifest


def align(bundle: EmbeddingBundle, corpus: list[Document]) -> AlignResult:
    """Map corpus document ids to bundle rows; ids are authoritative, not order."""
    row_of = {tid: i for i, tid in enumerate(bundle.manifest.tweet_ids)}
    index: dict[str, int] = {}
    missing_in_bundle: list[str] = []
    corpus_ids = set()
    for doc in corpus:
        corpus_ids.add(doc.id)
        row = row_of.get(doc.id)
        if row is None:
            missing_in_bundle.append(doc.id)
        else:
            index[doc.id] = row
    missing_in_corpus = [t for t in bundle.manifest.tweet_ids if t not in corpus_ids]
    if not index:
        raise ValidationError("bundle and corpus share no document ids")
    return AlignResult(
        index=index,
        missing_in_bundle=missing_in_bundle,
        missing_in_corpus=missing_in_corpus,
    )

"""Tweet loading, normalization, tokenization, vocabulary and phrasing.

The tokenizer contract (documented bit-exactly so other implementations can
reproduce it):

1. The raw text is NFKC-normalized, then casefolded.
2. The text is split on Unicode whitespace; every whitespace token is either
   kept (possibly transformed) or recorded in ``Document.dropped`` with a
   reason, so the whitespace token stream is fully accounted for.
3. A token matching the URL pattern ``https?://\\S+`` or ``(www\\.)?t\\.co/\\S+``
   (searched anywhere inside the token) is dropped with reason ``url``.
4. A token starting with ``#`` (``@``) is handled per the hashtag (mention)
   policy: ``strip-symbol-keep-body`` strips the leading symbol and keeps
   processing the body, ``drop-token`` drops it with reason ``hashtag``
   (``mention``).
5. All remaining non-alphanumeric characters (Unicode-aware, underscore
   included) are stripped from the token. Tokens emptied by this are dropped
   with reason ``symbol``.
6. Stopwords (exact match against the configured list) are dropped with
   reason ``stopword``; tokens shorter than ``min_token_len`` with reason
   ``short``.
"""

from __future__ import annotations

import csv
import json
import math
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Iterable, Optional

from stormtopics.errors import ValidationError


class MalformedRecordError(ValidationError):
    """A corpus record is missing required fields or is unparseable."""


class DuplicateIdError(ValidationError):
    """Two corpus records share the same id."""


# Matched anywhere inside a whitespace token (post-casefold).
URL_RE = re.compile(r"https?://\S+|\b(?:www\.)?t\.co/\S+")

# Unicode-aware: keeps letters and digits from any script, strips the rest
# (underscore included so phrasing's "_" delimiter cannot collide).
_NON_ALNUM_RE = re.compile(r"[\W_]+", re.UNICODE)

STRIP_SYMBOL_KEEP_BODY = "strip-symbol-keep-body"
DROP_TOKEN = "drop-token"
_POLICIES = (STRIP_SYMBOL_KEEP_BODY, DROP_TOKEN)

PHRASE_DELIMITER = "_"


@dataclass(frozen=True)
class RawTweet:
    id: str
    text: str
    author: Optional[str] = None
    timestamp: Optional[str] = None


@dataclass
class Document:
    """A preprocessed tweet: surviving tokens plus the removal trace."""

    id: str
    tokens: list[str]
    dropped: list[tuple[str, str]] = field(default_factory=list)


@dataclass(frozen=True)
class TermStats:
    term_id: int
    document_frequency: int
    collection_frequency: int


@dataclass
class Vocabulary:
    terms: dict[str, TermStats]
    n_documents: int

    def __contains__(self, term: str) -> bool:
        return term in self.terms

    def __len__(self) -> int:
        return len(self.terms)


@dataclass(frozen=True)
class PreprocessConfig:
    hashtag_policy: str = STRIP_SYMBOL_KEEP_BODY
    mention_policy: str = STRIP_SYMBOL_KEEP_BODY
    stopword_list_id: str = "english-v1"
    min_token_len: int = 2
    # Extra stopwords unioned with the bundled list; lets callers extend the
    # frozen list without shipping a new one.
    extra_stopwords: tuple[str, ...] = ()

    def __post_init__(self):
        if self.hashtag_policy not in _POLICIES:
            raise ValidationError(f"unknown hashtag_policy {self.hashtag_policy!r}")
        if self.mention_policy not in _POLICIES:
            raise ValidationError(f"unknown mention_policy {self.mention_policy!r}")
        if self.min_token_len < 1:
            raise ValidationError("min_token_len must be >= 1")


_STOPWORD_FILES = {"english-v1": "stopwords_en.txt"}


@lru_cache(maxsize=None)
def _bundled_stopwords(list_id: str) -> frozenset[str]:
    try:
        fname = _STOPWORD_FILES[list_id]
    except KeyError:
        raise ValidationError(f"unknown stopword list id {list_id!r}") from None
    text = resources.files("stormtopics.data").joinpath(fname).read_text("utf-8")
    words = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line)
    return frozenset(words)


def stopword_set(cfg: PreprocessConfig) -> frozenset[str]:
    return _bundled_stopwords(cfg.stopword_list_id) | frozenset(cfg.extra_stopwords)


def load_tweets(path, format: str = "jsonl") -> list[RawTweet]:
    """Load raw tweets from a JSONL or CSV file, in file order.

    Duplicate ids and malformed records are rejected with errors naming the
    offending id / line number.
    """
    if format == "jsonl":
        tweets = _load_jsonl(path)
    elif format == "csv":
        tweets = _load_csv(path)
    else:
        raise ValidationError(f"unknown corpus format {format!r}")
    seen: set[str] = set()
    for i, tw in enumerate(tweets, start=1):
        if tw.id in seen:
            raise DuplicateIdError(f"duplicate tweet id {tw.id!r} in {path}")
        seen.add(tw.id)
    return tweets


def _check_record(rec_id, text, line_no, path) -> tuple[str, str]:
    if rec_id is None or str(rec_id) == "":
        raise MalformedRecordError(f"{path}: line {line_no}: missing 'id'")
    if text is None:
        raise MalformedRecordError(f"{path}: line {line_no}: missing 'text'")
    normalized = unicodedata.normalize("NFKC", str(text))
    if not normalized.strip():
        raise MalformedRecordError(
            f"{path}: line {line_no}: text empty after normalization"
        )
    return str(rec_id), str(text)


def _load_jsonl(path) -> list[RawTweet]:
    tweets = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecordError(
                    f"{path}: line {line_no}: invalid JSON ({exc.msg})"
                ) from None
            if not isinstance(rec, dict):
                raise MalformedRecordError(
                    f"{path}: line {line_no}: record is not an object"
                )
            rec_id, text = _check_record(rec.get("id"), rec.get("text"), line_no, path)
            author = rec.get("author")
            tweets.append(
                RawTweet(
                    id=rec_id,
                    text=text,
                    author=None if author is None else str(author),
                    timestamp=rec.get("created_at"),
                )
            )
    return tweets


def _load_csv(path) -> list[RawTweet]:
    tweets = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"id", "text"} <= set(reader.fieldnames):
            raise MalformedRecordError(f"{path}: line 1: header must include id,text")
        for line_no, row in enumerate(reader, start=2):
            rec_id, text = _check_record(row.get("id"), row.get("text"), line_no, path)
            tweets.append(
                RawTweet(
                    id=rec_id,
                    text=text,
                    author=row.get("author") or None,
                    timestamp=row.get("created_at") or None,
                )
            )
    return tweets


def filter_token(raw: str, cfg: PreprocessConfig, stopwords: frozenset[str]):
    """Apply the per-token filtering rules to one whitespace token.

    Returns ``(term, None)`` when the token survives (possibly transformed)
    or ``(None, reason)`` when it is dropped. ``raw`` must already be
    NFKC-normalized and casefolded.
    """
    if URL_RE.search(raw):
        return None, "url"
    body = raw
    if body.startswith("#"):
        if cfg.hashtag_policy == DROP_TOKEN:
            return None, "hashtag"
        body = body[1:]
    elif body.startswith("@"):
        if cfg.mention_policy == DROP_TOKEN:
            return None, "mention"
        body = body[1:]
    cleaned = _NON_ALNUM_RE.sub("", body)
    if not cleaned:
        return None, "symbol"
    if cleaned in stopwords:
        return None, "stopword"
    if len(cleaned) < cfg.min_token_len:
        return None, "short"
    return cleaned, None


def tokenize(tweet: RawTweet, cfg: PreprocessConfig) -> Document:
    """Tokenize one tweet per the documented pipeline.

    Every whitespace token of the normalized text ends up either in
    ``tokens`` (transformed) or in ``dropped`` as ``(raw_token, reason)``.
    An empty token list is a valid result.
    """
    stop = stopword_set(cfg)
    text = unicodedata.normalize("NFKC", tweet.text).casefold()
    tokens: list[str] = []
    dropped: list[tuple[str, str]] = []
    for raw in text.split():
        term, reason = filter_token(raw, cfg, stop)
        if term is None:
            dropped.append((raw, reason))
        else:
            tokens.append(term)
    return Document(id=tweet.id, tokens=tokens, dropped=dropped)


def tokenize_all(tweets: Iterable[RawTweet], cfg: PreprocessConfig) -> list[Document]:
    return [tokenize(tw, cfg) for tw in tweets]


def build_vocabulary(docs: list[Document]) -> Vocabulary:
    """Count document and collection frequencies; term ids by first occurrence."""
    if not docs:
        raise ValidationError("cannot build a vocabulary from an empty document list")
    term_ids: dict[str, int] = {}
    df: Counter = Counter()
    cf: Counter = Counter()
    for doc in docs:
        for tok in doc.tokens:
            if tok not in term_ids:
                term_ids[tok] = len(term_ids)
            cf[tok] += 1
        for tok in set(doc.tokens):
            df[tok] += 1
    terms = {
        t: TermStats(term_id=i, document_frequency=df[t], collection_frequency=cf[t])
        for t, i in term_ids.items()
    }
    return Vocabulary(terms=terms, n_documents=len(docs))


def detect_phrases(
    docs: list[Document], min_count: int, threshold: float
) -> list[Document]:
    """Merge frequently co-occurring adjacent token pairs into ``a_b`` tokens.

    A pair is merged when
    ``(count(a,b) - min_count) * N / (count(a) * count(b)) >= threshold``
    with ``N`` the number of distinct tokens in ``docs``, ``count(a,b)`` the
    adjacent-bigram count and ``count(.)`` unigram occurrence counts. Merging
    is a single left-to-right, non-overlapping pass per document.
    """
    if min_count < 1:
        raise ValidationError("min_count must be >= 1")
    unigrams: Counter = Counter()
    bigrams: Counter = Counter()
    for doc in docs:
        toks = doc.tokens
        unigrams.update(toks)
        for a, b in zip(toks, toks[1:]):
            bigrams[(a, b)] += 1
    n_distinct = len(unigrams)
    if n_distinct == 0 or math.isinf(threshold):
        return [Document(d.id, list(d.tokens), list(d.dropped)) for d in docs]

    def score(a: str, b: str) -> float:
        pair = bigrams.get((a, b), 0)
        return (pair - min_count) * n_distinct / (unigrams[a] * unigrams[b])

    out = []
    for doc in docs:
        toks = doc.tokens
        merged: list[str] = []
        i = 0
        while i < len(toks):
            if i + 1 < len(toks) and score(toks[i], toks[i + 1]) >= threshold:
                merged.append(toks[i] + PHRASE_DELIMITER + toks[i + 1])
                i += 2
            else:
                merged.append(toks[i])
                i += 1
        out.append(Document(doc.id, merged, list(doc.dropped)))
    return out


def dump_documents(docs: Iterable[Document]) -> str:
    """Serialize documents to the JSONL interchange format."""
    lines = []
    for d in docs:
        lines.append(
            json.dumps(
                {"id": d.id, "tokens": d.tokens, "dropped": [list(p) for p in d.dropped]},
                ensure_ascii=False,
                sort_keys=True,
            )
        )
    return "\n".join(lines) + "\n"


def load_documents(path) -> list[Document]:
    docs = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                docs.append(
                    Document(
                        id=str(rec["id"]),
                        tokens=[str(t) for t in rec["tokens"]],
                        dropped=[(str(t), str(r)) for t, r in rec.get("dropped", [])],
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                raise MalformedRecordError(
                    f"{path}: line {line_no}: invalid document record"
                ) from None
    return docs

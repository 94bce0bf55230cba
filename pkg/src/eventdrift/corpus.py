"""Document ingestion, tweet-style tokenization, time-window chunking and
vocabulary construction."""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from enum import Enum
from importlib import resources
from pathlib import Path


class DataError(Exception):
    """Malformed or inconsistent input data (bad record, unsorted stream, ...)."""


# --------------------------------------------------------------------------
# tokenization
# --------------------------------------------------------------------------

_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
# leading retweet marker: "RT @someone:" at the very start of the text
_RT_RE = re.compile(r"^\s*rt\s*@\w+:?\s*", re.IGNORECASE)
# runs of 4+ identical characters collapse to exactly 3
_REPEAT_RE = re.compile(r"(.)\1{3,}", re.DOTALL)

_EMOTICON = r"""
    [<>]?
    [:;=8]                         # eyes
    [\-o\*']?                      # optional nose
    [\)\]\(\[dDpP/\:\}\{@\|\\]     # mouth
    |
    [\)\]\(\[dDpP/\:\}\{@\|\\]     # mouth
    [\-o\*']?                      # optional nose
    [:;=8]                         # eyes
    [<>]?
"""

_TOKEN_RE = re.compile(
    r"""
    (?:%s)                         # emoticons
    |
    @\w+                           # user mentions
    |
    \w+(?:['’\-]\w+)+         # words with internal apostrophes or dashes
    |
    \w+                            # plain words and numbers
    |
    [^\w\s]+                       # runs of symbols / punctuation
    """
    % _EMOTICON,
    re.VERBOSE | re.UNICODE,
)


def tokenize(raw_text: str) -> tuple[str, ...]:
    """Normalize one post into an ordered token tuple.

    Links and a leading retweet marker are dropped, hash symbols are stripped
    (the tag word itself is kept), text is lowercased and any character run
    longer than 3 is squashed to 3.  Punctuation and emoticons survive as
    their own tokens; they are only removed later, by vocabulary
    preprocessing.
    """
    text = _URL_RE.sub(" ", raw_text)
    while True:
        stripped = _RT_RE.sub("", text, count=1)
        if stripped == text:
            break
        text = stripped
    text = text.replace("#", " ")
    text = _REPEAT_RE.sub(r"\1\1\1", text.lower())
    return tuple(_TOKEN_RE.findall(text))


_EMOJI_RANGES = (
    (0x1F000, 0x1FAFF),  # emoji, symbols, pictographs
    (0x2600, 0x27BF),    # misc symbols, dingbats
    (0x2B00, 0x2BFF),    # arrows, stars
)


def _is_emoji(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _EMOJI_RANGES)


def is_punctuation_token(token: str) -> bool:
    """True iff every character is non-alphanumeric and not an emoji."""
    return all(not ch.isalnum() and not _is_emoji(ch) for ch in token)


# --------------------------------------------------------------------------
# documents
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Document:
    """One timestamped post."""

    id: str
    timestamp: datetime
    raw_text: str
    tokens: tuple[str, ...]

    @classmethod
    def from_text(cls, id: str, timestamp: datetime, raw_text: str) -> "Document":
        return cls(id=id, timestamp=timestamp, raw_text=raw_text,
                   tokens=tokenize(raw_text))


def parse_timestamp(value: str) -> datetime:
    """Parse an ISO-8601 timestamp; naive values are taken as UTC."""
    try:
        ts = datetime.fromisoformat(value.replace("Z", "+00:00"))
    except (ValueError, AttributeError) as exc:
        raise DataError(f"unparseable timestamp {value!r}") from exc
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def read_documents(path: str | Path) -> list[Document]:
    """Read one JSON record per line with fields id, time and text."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"input file not found: {path}")
    documents = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: invalid JSON record") from exc
            try:
                doc_id = str(record["id"])
                time_field = record["time"]
                text = record["text"]
            except (KeyError, TypeError) as exc:
                raise DataError(
                    f"{path}:{lineno}: record needs fields id, time, text") from exc
            documents.append(
                Document.from_text(doc_id, parse_timestamp(time_field), text))
    return documents


# --------------------------------------------------------------------------
# time windows
# --------------------------------------------------------------------------

Vocabulary = dict  # token -> frequency


@dataclass(frozen=True)
class TimeWindow:
    """A half-open slice [start, end) of the stream with its documents."""

    index: int
    start: datetime
    end: datetime
    documents: tuple[Document, ...] = ()

    @property
    def raw_vocabulary(self) -> Vocabulary:
        counts: Counter = Counter()
        for doc in self.documents:
            counts.update(doc.tokens)
        return dict(counts)

    @property
    def token_sequences(self) -> list[tuple[str, ...]]:
        return [doc.tokens for doc in self.documents]

    @property
    def n_tokens(self) -> int:
        return sum(len(doc.tokens) for doc in self.documents)


def chunk_stream(documents: list[Document], window_length: timedelta,
                 stream_start: datetime) -> list[TimeWindow]:
    """Split a chronological document list into contiguous fixed-length windows.

    A document sitting exactly on a boundary belongs to the later window.
    Empty windows are kept so that window indices map 1:1 to wall-clock time.
    """
    if window_length <= timedelta(0):
        raise ValueError("window_length must be positive")
    if not documents:
        return []

    length = window_length.total_seconds()
    previous = None
    for position, doc in enumerate(documents):
        if previous is not None and doc.timestamp < previous.timestamp:
            raise DataError(
                f"stream not sorted: record {doc.id!r} at position {position} "
                f"({doc.timestamp.isoformat()}) precedes {previous.id!r} "
                f"({previous.timestamp.isoformat()})")
        if doc.timestamp < stream_start:
            raise DataError(
                f"record {doc.id!r} ({doc.timestamp.isoformat()}) predates "
                f"stream start {stream_start.isoformat()}")
        previous = doc

    span = (documents[-1].timestamp - stream_start).total_seconds()
    n_windows = int(span // length) + 1

    buckets: list[list[Document]] = [[] for _ in range(n_windows)]
    for doc in documents:
        offset = (doc.timestamp - stream_start).total_seconds()
        buckets[int(offset // length)].append(doc)

    return [
        TimeWindow(index=i,
                   start=stream_start + i * window_length,
                   end=stream_start + (i + 1) * window_length,
                   documents=tuple(bucket))
        for i, bucket in enumerate(buckets)
    ]


# --------------------------------------------------------------------------
# vocabularies
# --------------------------------------------------------------------------

class PreprocessMode(Enum):
    """Which token classes survive vocabulary preprocessing."""

    ALL_TOKENS = "all_tokens"
    NO_PUNCTUATION = "no_punctuation"
    NO_PUNCTUATION_NO_STOPWORDS = "no_punctuation_no_stopwords"


def build_vocabulary(window: TimeWindow, mode: PreprocessMode | None,
                     beta: int, stopwords: frozenset[str] = frozenset()) -> Vocabulary:
    """Count window tokens, optionally filtered.

    With mode None the raw counts are returned untouched.  Otherwise
    punctuation-only tokens and stop words are removed according to the mode
    and tokens rarer than beta are dropped as outliers.
    """
    if beta < 0:
        raise ValueError("beta must be non-negative")
    counts = window.raw_vocabulary
    if mode is None:
        return counts
    if mode is not PreprocessMode.ALL_TOKENS:
        counts = {t: c for t, c in counts.items() if not is_punctuation_token(t)}
    if mode is PreprocessMode.NO_PUNCTUATION_NO_STOPWORDS:
        counts = {t: c for t, c in counts.items() if t not in stopwords}
    return {t: c for t, c in counts.items() if c >= beta}


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """Load a stop-word list, one token per line; defaults to the packaged
    English list."""
    if path is None:
        text = (resources.files("eventdrift") / "data" / "stopwords_en.txt").read_text(
            encoding="utf-8")
    else:
        path = Path(path)
        if not path.exists():
            raise DataError(f"stop-word file not found: {path}")
        text = path.read_text(encoding="utf-8")
    return frozenset(w.strip().lower() for w in text.splitlines() if w.strip())

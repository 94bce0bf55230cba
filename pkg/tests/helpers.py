"""Shared builders for synthetic documents, windows and streams."""

import json
import random
from datetime import datetime, timedelta, timezone

from eventdrift.clustering import Dendrogram
from eventdrift.corpus import Document, TimeWindow

STREAM_START = datetime(2020, 3, 1, 12, 0, tzinfo=timezone.utc)
WINDOW_LENGTH = timedelta(minutes=2)

# two stable sub-topics per block keep same-block dendrograms consistent
# across retrainings, so only the block switch moves the cluster structure
TOPIC_BLOCK_A = (
    ("striker", "header", "corner", "cross"),
    ("keeper", "save", "punch", "dive"),
)
TOPIC_BLOCK_B = (
    ("verdict", "jury", "appeal", "ruling"),
    ("witness", "testimony", "oath", "stand"),
)

BLOCK_A_VOCAB = frozenset(w for topic in TOPIC_BLOCK_A for w in topic)
BLOCK_B_VOCAB = frozenset(w for topic in TOPIC_BLOCK_B for w in topic)


def make_document(doc_id, timestamp, text):
    return Document.from_text(str(doc_id), timestamp, text)


def window_from_texts(index, texts, start=STREAM_START, length=WINDOW_LENGTH):
    """Build one window directly from raw texts, stamped inside its span."""
    w_start = start + index * length
    docs = tuple(
        make_document(f"{index}-{i}", w_start + timedelta(seconds=i % int(length.total_seconds())), text)
        for i, text in enumerate(texts))
    return TimeWindow(index=index, start=w_start, end=w_start + length,
                      documents=docs)


def two_block_texts(n_windows=4, switch_at=3, docs_per_window=120,
                    words_per_doc=8, seed=11):
    """Per-window text lists: block A sentences, then block B from switch_at."""
    rng = random.Random(seed)
    windows = []
    for w in range(n_windows):
        topics = TOPIC_BLOCK_A if w < switch_at else TOPIC_BLOCK_B
        texts = []
        for d in range(docs_per_window):
            topic = topics[d % len(topics)]
            texts.append(" ".join(rng.choice(topic) for _ in range(words_per_doc)))
        windows.append(texts)
    return windows


def two_block_windows(**kwargs):
    return [window_from_texts(i, texts)
            for i, texts in enumerate(two_block_texts(**kwargs))]


def stream_lines(window_texts, start=STREAM_START, length=WINDOW_LENGTH):
    """JSONL lines for a list of per-window text lists, documents spread
    evenly so timestamps stay sorted for any per-window count."""
    lines = []
    doc_id = 0
    seconds = length.total_seconds()
    for w, texts in enumerate(window_texts):
        for d, text in enumerate(texts):
            ts = start + w * length + timedelta(seconds=d * seconds / len(texts))
            lines.append(json.dumps(
                {"id": str(doc_id), "time": ts.isoformat(), "text": text}))
            doc_id += 1
    return lines


def write_stream(path, window_texts, **kwargs):
    path.write_text("\n".join(stream_lines(window_texts, **kwargs)) + "\n",
                    encoding="utf-8")
    return path


def pooled_vocab_texts(n_docs, vocab, words_per_doc=6, seed=0):
    """Documents sampled from a fixed word pool, for scaling fixtures."""
    rng = random.Random(seed)
    return [" ".join(rng.choice(vocab) for _ in range(words_per_doc))
            for _ in range(n_docs)]


def deep_branch_tree():
    """Seven-leaf dendrogram with one long chain and one shallow pair.

    Leaf ids: 0 rashford, 1 goal, 2 mate, 3 a, 4 b, 5 firmino, 6 c.
    The chain side nests {goal, mate} inside {rashford, ...} four levels
    deep; {firmino, c} hangs directly off the root.  Known values:
    max_levels 6, similarity(rashford, goal) = 4/6,
    similarity(firmino, goal) = 1/6.
    """
    return Dendrogram(
        leaves=("rashford", "goal", "mate", "a", "b", "firmino", "c"),
        merges=(
            (1, 2, 0.025),
            (0, 7, 0.03),
            (3, 8, 0.05),
            (4, 9, 0.08),
            (5, 6, 0.10),
            (10, 11, 0.25),
        ),
    )

"""Synthesize a topic-block JSONL stream plus matching ground truth.

The stream holds a fixed number of equal-length windows drawn from topic
block A, then switches to block B at a chosen window.  The ground-truth
file marks the switch window with the block-B sub-topics as synonym
groups, so a detect + eval round trip can score itself end to end.

Example:
    python scripts/generate_stream.py --out stream.jsonl --gt-out gt.json
    eventdrift detect --input stream.jsonl --start 2020-03-01T12:00:00Z \\
        --window-len 2m --alpha 0.5 --out report.json
    eventdrift eval --input report.json --gt gt.json
"""

import argparse
import json
import random
from datetime import timedelta

from eventdrift.corpus import parse_timestamp

TOPIC_BLOCK_A = (
    ("striker", "header", "corner", "cross"),
    ("keeper", "save", "punch", "dive"),
)
TOPIC_BLOCK_B = (
    ("verdict", "jury", "appeal", "ruling"),
    ("witness", "testimony", "oath", "stand"),
)


def window_texts(rng, block, n_docs, words_per_doc):
    texts = []
    for _ in range(n_docs):
        topic = block[rng.randrange(len(block))]
        texts.append(" ".join(rng.choice(topic) for _ in range(words_per_doc)))
    return texts


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", required=True, help="stream JSONL output path")
    parser.add_argument("--gt-out", help="ground-truth JSON output path")
    parser.add_argument("--windows", type=int, default=4,
                        help="total window count (default 4)")
    parser.add_argument("--switch-at", type=int, default=3,
                        help="first block-B window index (default 3)")
    parser.add_argument("--docs-per-window", type=int, default=120)
    parser.add_argument("--words-per-doc", type=int, default=8)
    parser.add_argument("--start", default="2020-03-01T12:00:00Z",
                        help="stream start, ISO-8601")
    parser.add_argument("--window-seconds", type=float, default=120.0)
    parser.add_argument("--seed", type=int, default=11)
    args = parser.parse_args(argv)

    if not 0 < args.switch_at < args.windows:
        parser.error("--switch-at must fall inside the window range")

    rng = random.Random(args.seed)
    start = parse_timestamp(args.start)
    length = timedelta(seconds=args.window_seconds)

    doc_id = 0
    with open(args.out, "w", encoding="utf-8") as handle:
        for index in range(args.windows):
            block = TOPIC_BLOCK_A if index < args.switch_at else TOPIC_BLOCK_B
            texts = window_texts(rng, block, args.docs_per_window,
                                 args.words_per_doc)
            for position, text in enumerate(texts):
                stamp = start + index * length + timedelta(
                    seconds=position * args.window_seconds / len(texts))
                handle.write(json.dumps({"id": str(doc_id),
                                         "time": stamp.isoformat(),
                                         "text": text}) + "\n")
                doc_id += 1

    print(f"wrote {doc_id} documents over {args.windows} windows to {args.out}")

    if args.gt_out:
        switch_start = start + args.switch_at * length
        payload = {switch_start.isoformat(): [{
            "label": "topic switch",
            "synonym_groups": [list(topic) for topic in TOPIC_BLOCK_B],
        }]}
        with open(args.gt_out, "w", encoding="utf-8") as handle:
            json.dump(payload, handle, indent=2)
            handle.write("\n")
        print(f"wrote ground truth for window {args.switch_at} to {args.gt_out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

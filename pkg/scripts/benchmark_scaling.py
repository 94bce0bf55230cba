"""Measure full-pipeline wall time across document counts and worker counts.

Builds synthetic streams of pooled-vocabulary documents, runs the detect
pipeline on each (document count, worker count) cell, and prints the four
stage timings plus the total.  Useful for checking that runtime stays
roughly linear in document count and that extra workers help on
multi-core machines.

Example:
    python scripts/benchmark_scaling.py --doc-counts 5000,25000 --workers 1,8
"""

import argparse
import csv
import random
import sys
import tempfile
from datetime import timedelta
from pathlib import Path

from eventdrift.corpus import parse_timestamp
from eventdrift.detection import DetectorConfig
from eventdrift.embedding import EmbeddingConfig
from eventdrift.pipeline import (STAGE_CHUNK, STAGE_EXTRACT, STAGE_IDENTIFY,
                                 STAGE_TRAIN, RunConfig, run_detect)

STAGES = (STAGE_CHUNK, STAGE_TRAIN, STAGE_IDENTIFY, STAGE_EXTRACT)


def int_list(value):
    return [int(piece) for piece in value.split(",") if piece.strip()]


def write_stream(path, start, length, n_windows, n_docs, pool, words, seed):
    rng = random.Random(seed)
    doc_id = 0
    with open(path, "w", encoding="utf-8") as handle:
        for index in range(n_windows):
            for position in range(n_docs):
                stamp = start + index * length + timedelta(
                    seconds=position * length.total_seconds() / n_docs)
                text = " ".join(rng.choice(pool) for _ in range(words))
                handle.write(f'{{"id": "{doc_id}", '
                             f'"time": "{stamp.isoformat()}", '
                             f'"text": "{text}"}}\n')
                doc_id += 1


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--doc-counts", type=int_list, default=[5_000, 25_000],
                        help="comma-separated documents per window")
    parser.add_argument("--workers", type=int_list, default=[1],
                        help="comma-separated worker counts")
    parser.add_argument("--windows", type=int, default=3)
    parser.add_argument("--vocab-size", type=int, default=500)
    parser.add_argument("--words-per-doc", type=int, default=6)
    parser.add_argument("--dim", type=int, default=32)
    parser.add_argument("--context", type=int, default=2)
    parser.add_argument("--epochs", type=int, default=1)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--out", help="optional CSV output path")
    args = parser.parse_args(argv)

    start = parse_timestamp("2020-03-01T12:00:00Z")
    length = timedelta(minutes=2)
    pool = [f"w{i:04d}" for i in range(args.vocab_size)]
    embedding = EmbeddingConfig(dimension=args.dim, context_size=args.context,
                                epochs=args.epochs, seed=args.seed)

    rows = []
    with tempfile.TemporaryDirectory(prefix="eventdrift-bench-") as workdir:
        for n_docs in args.doc_counts:
            stream = Path(workdir) / f"stream-{n_docs}.jsonl"
            write_stream(stream, start, length, args.windows, n_docs, pool,
                         args.words_per_doc, args.seed)
            for workers in args.workers:
                config = RunConfig(input_path=stream, stream_start=start,
                                   window_length=length,
                                   detector=DetectorConfig(alpha=0.5),
                                   embedding=embedding, workers=workers)
                report = run_detect(config)
                timings = report["timings"]
                row = {"docs_per_window": n_docs, "workers": workers}
                row.update({stage: round(timings[stage], 4) for stage in STAGES})
                row["total"] = round(timings["total"], 4)
                rows.append(row)
                print(f"docs={n_docs:>7} workers={workers}  "
                      + "  ".join(f"{stage}={row[stage]:.2f}s"
                                  for stage in STAGES)
                      + f"  total={row['total']:.2f}s")

    if len(args.doc_counts) > 1 and len(rows) > 1:
        base = next(r for r in rows if r["docs_per_window"] == args.doc_counts[0]
                    and r["workers"] == args.workers[0])
        peak = next(r for r in rows if r["docs_per_window"] == args.doc_counts[-1]
                    and r["workers"] == args.workers[0])
        data_ratio = args.doc_counts[-1] / args.doc_counts[0]
        time_ratio = peak["total"] / base["total"]
        print(f"{data_ratio:.0f}x documents -> {time_ratio:.1f}x time "
              f"at workers={args.workers[0]}")

    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
        print(f"table written to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

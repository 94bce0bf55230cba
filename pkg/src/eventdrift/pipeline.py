"""End-to-end runs: chunk the stream, train per-window embeddings, identify
event windows, extract event words, and emit versioned JSON reports."""

from __future__ import annotations

import csv
import json
import logging
import multiprocessing
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from datetime import datetime, timedelta
from pathlib import Path

from .corpus import (DataError, TimeWindow, build_vocabulary, chunk_stream,
                     load_stopwords, parse_timestamp, read_documents)
from .detection import (DetectorConfig, PairComputation, WindowPairResult,
                        compare_windows)
from .embedding import EmbeddingConfig, EmbeddingModel, train_window_embeddings
from .evaluation import MetricsReport, compute_metrics, load_ground_truth

logger = logging.getLogger(__name__)

REPORT_SCHEMA = "eventdrift-report/1"
METRICS_SCHEMA = "eventdrift-metrics/1"
CHUNK_SCHEMA = "eventdrift-chunk/1"

STAGE_CHUNK = "stream_chunking"
STAGE_TRAIN = "embedding_learning"
STAGE_IDENTIFY = "event_window_identification"
STAGE_EXTRACT = "event_word_extraction"


@dataclass(frozen=True)
class RunConfig:
    input_path: Path
    stream_start: datetime
    window_length: timedelta
    detector: DetectorConfig
    embedding: EmbeddingConfig = EmbeddingConfig()
    stopword_path: Path | None = None
    gt_path: Path | None = None
    workers: int = 1
    output_path: Path | None = None

    def __post_init__(self):
        if self.window_length <= timedelta(0):
            raise ValueError("window_length must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


def _train_job(args):
    window, config = args
    return train_window_embeddings(window, config)


def _pair_job(args):
    return compare_windows(*args)


def _parallel_map(function, jobs, pool, workers):
    if pool is None or len(jobs) <= 1:
        return [function(job) for job in jobs]
    chunksize = max(1, len(jobs) // (workers * 4))
    return list(pool.map(function, jobs, chunksize=chunksize))


def _config_echo(config: RunConfig) -> dict:
    det, emb = config.detector, config.embedding
    return {
        "input": str(config.input_path),
        "stream_start": config.stream_start.isoformat(),
        "window_length_seconds": config.window_length.total_seconds(),
        "alpha": det.alpha,
        "beta": det.beta,
        "aggregation": det.aggregation.value,
        "preprocess": det.preprocess.value,
        "change_epsilon": det.change_epsilon,
        "dimension": emb.dimension,
        "context_size": emb.context_size,
        "min_count": emb.min_count,
        "epochs": emb.epochs,
        "learning_rate": emb.learning_rate,
        "negatives_per_sample": emb.negatives_per_sample,
        "noise_exponent": emb.noise_exponent,
        "batch_size": emb.batch_size,
        "seed": emb.seed,
        "workers": config.workers,
        "stopwords": str(config.stopword_path) if config.stopword_path else None,
        "ground_truth": str(config.gt_path) if config.gt_path else None,
    }


def _window_record(window: TimeWindow) -> dict:
    return {
        "index": window.index,
        "start": window.start.isoformat(),
        "end": window.end.isoformat(),
        "documents": len(window.documents),
        "tokens": window.n_tokens,
    }


def _result_record(result: WindowPairResult, window: TimeWindow) -> dict:
    return {
        "window_index": result.window_index,
        "window_start": window.start.isoformat(),
        "window_end": window.end.isoformat(),
        "cluster_change": result.cluster_change,
        "vocabulary_change": result.vocabulary_change,
        "overall_change": result.overall_change,
        "is_event": result.is_event,
        "event_words": sorted(result.event_words),
    }


def write_json(payload: dict, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _make_pool(workers: int):
    if workers <= 1:
        return None
    context = multiprocessing.get_context("fork")
    return ProcessPoolExecutor(max_workers=workers, mp_context=context)


def run_detect(config: RunConfig) -> dict:
    """Execute the full pipeline and return the report (also written to
    config.output_path when set).

    The four stages are timed individually; the pool, when workers > 1, is
    started before the clock so its spin-up never pollutes stage times.
    Output values are independent of the worker count.
    """
    stopwords = load_stopwords(config.stopword_path)
    pool = _make_pool(config.workers)
    try:
        t0 = time.perf_counter()
        documents = read_documents(config.input_path)
        if not documents:
            raise DataError(f"input stream {config.input_path} has no documents")
        windows = chunk_stream(documents, config.window_length,
                               config.stream_start)
        t1 = time.perf_counter()

        models = _parallel_map(_train_job,
                               [(w, config.embedding) for w in windows],
                               pool, config.workers)
        t2 = time.perf_counter()

        detector = config.detector
        vocabularies = [
            build_vocabulary(w, detector.preprocess, detector.beta, stopwords)
            for w in windows
        ]
        pair_jobs = [
            (windows[t + 1].index, vocabularies[t], vocabularies[t + 1],
             models[t], models[t + 1], detector)
            for t in range(len(windows) - 1)
        ]
        computations = _parallel_map(_pair_job, pair_jobs, pool, config.workers)
        t3 = time.perf_counter()

        results = [c.to_result() for c in computations]
        t4 = time.perf_counter()
    finally:
        if pool is not None:
            pool.shutdown()

    if len(windows) < 2:
        logger.warning("stream spans a single window, nothing to compare")

    report = {
        "schema": REPORT_SCHEMA,
        "config": _config_echo(config),
        "timings": {
            STAGE_CHUNK: t1 - t0,
            STAGE_TRAIN: t2 - t1,
            STAGE_IDENTIFY: t3 - t2,
            STAGE_EXTRACT: t4 - t3,
            "total": t4 - t0,
        },
        "windows": [_window_record(w) for w in windows],
        "results": [_result_record(r, windows[r.window_index]) for r in results],
    }
    if config.output_path is not None:
        write_json(report, config.output_path)
    return report


def results_from_report(report: dict) -> list[WindowPairResult]:
    if report.get("schema") != REPORT_SCHEMA:
        raise DataError(f"unsupported report schema {report.get('schema')!r}")
    return [
        WindowPairResult(
            window_index=rec["window_index"],
            cluster_change=rec["cluster_change"],
            vocabulary_change=rec["vocabulary_change"],
            overall_change=rec["overall_change"],
            is_event=rec["is_event"],
            event_words=frozenset(rec["event_words"]))
        for rec in report["results"]
    ]


def run_eval(report_path: str | Path, gt_path: str | Path,
             output_path: str | Path | None = None) -> MetricsReport:
    """Score a written detection report against a ground-truth file."""
    report_path = Path(report_path)
    if not report_path.exists():
        raise DataError(f"report file not found: {report_path}")
    try:
        report = json.loads(report_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{report_path}: invalid JSON") from exc
    results = results_from_report(report)

    stream_start = parse_timestamp(report["config"]["stream_start"])
    window_length = timedelta(seconds=report["config"]["window_length_seconds"])
    gt = load_ground_truth(gt_path, stream_start, window_length)
    if not gt.windows:
        raise DataError(f"{gt_path}: ground truth names no windows")
    known = {w["index"] for w in report["windows"]}
    missing = sorted(set(gt.windows) - known)
    if missing:
        raise DataError(
            f"{gt_path}: ground-truth window indices {missing} are outside "
            f"the chunked stream")

    metrics = compute_metrics(results, gt)
    if output_path is not None:
        payload = {"schema": METRICS_SCHEMA, **metrics.as_dict()}
        write_json(payload, output_path)
    return metrics


def run_sweep(config: RunConfig, alpha_grid: list[float],
              beta_grid: list[int]) -> list[dict]:
    """Grid-evaluate (alpha, beta): embeddings are trained once, per-beta
    change values are computed once, and alpha only thresholds them.

    Returns rows sorted by F1 descending; written as CSV to
    config.output_path when set.
    """
    if config.gt_path is None:
        raise DataError("sweep requires a ground-truth file")
    if not alpha_grid or not beta_grid:
        raise ValueError("alpha and beta grids must be nonempty")

    stopwords = load_stopwords(config.stopword_path)
    documents = read_documents(config.input_path)
    if not documents:
        raise DataError(f"input stream {config.input_path} has no documents")
    windows = chunk_stream(documents, config.window_length, config.stream_start)
    gt = load_ground_truth(config.gt_path, config.stream_start,
                           config.window_length)
    if not gt.windows:
        raise DataError(f"{config.gt_path}: ground truth names no windows")
    outside = sorted(set(gt.windows) - {w.index for w in windows})
    if outside:
        raise DataError(f"ground-truth window indices {outside} are outside "
                        f"the chunked stream")

    pool = _make_pool(config.workers)
    try:
        models = _parallel_map(_train_job,
                               [(w, config.embedding) for w in windows],
                               pool, config.workers)
        rows = []
        for beta in beta_grid:
            detector = replace(config.detector, beta=beta)
            vocabularies = [
                build_vocabulary(w, detector.preprocess, beta, stopwords)
                for w in windows
            ]
            pair_jobs = [
                (windows[t + 1].index, vocabularies[t], vocabularies[t + 1],
                 models[t], models[t + 1], detector)
                for t in range(len(windows) - 1)
            ]
            computations = _parallel_map(_pair_job, pair_jobs, pool,
                                         config.workers)
            base_results = [c.to_result() for c in computations]
            for alpha in alpha_grid:
                rethresholded = [
                    replace(r, is_event=bool(r.overall_change >= alpha))
                    for r in base_results
                ]
                metrics = compute_metrics(rethresholded, gt)
                rows.append({
                    "alpha": alpha,
                    "beta": beta,
                    "recall": metrics.recall,
                    "precision": metrics.precision,
                    "f1": metrics.f1,
                    "keyword_recall": metrics.keyword_recall,
                    "detected_windows": metrics.counts.detected_windows,
                    "relevant_windows": metrics.counts.relevant_windows,
                })
    finally:
        if pool is not None:
            pool.shutdown()

    rows.sort(key=lambda row: (-row["f1"], row["alpha"], row["beta"]))
    if config.output_path is not None:
        with open(config.output_path, "w", encoding="utf-8", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
    return rows


def run_chunk(config: RunConfig) -> dict:
    """Chunk only: emit window boundaries and counts for debugging."""
    documents = read_documents(config.input_path)
    if not documents:
        raise DataError(f"input stream {config.input_path} has no documents")
    windows = chunk_stream(documents, config.window_length, config.stream_start)
    payload = {
        "schema": CHUNK_SCHEMA,
        "config": {
            "input": str(config.input_path),
            "stream_start": config.stream_start.isoformat(),
            "window_length_seconds": config.window_length.total_seconds(),
        },
        "windows": [_window_record(w) for w in windows],
    }
    if config.output_path is not None:
        write_json(payload, config.output_path)
    return payload

"""Command line entry points: detect, eval, sweep and chunk subcommands."""

from __future__ import annotations

import argparse
import logging
import re
import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # 3.10
    import tomli as tomllib

from .corpus import DataError, PreprocessMode, parse_timestamp
from .detection import Aggregation, DetectorConfig
from .embedding import EmbeddingConfig
from .pipeline import RunConfig, run_chunk, run_detect, run_eval, run_sweep

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    """Bad invocation: missing flags, unparseable values, bad combinations."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


_DURATION_RE = re.compile(r"^(\d+(?:\.\d+)?)([smh]?)$")
_DURATION_FACTOR = {"": 1, "s": 1, "m": 60, "h": 3600}


def parse_window_length(value) -> timedelta:
    """Accept plain seconds or an s/m/h suffixed duration, e.g. 120, 2m, 1h."""
    match = _DURATION_RE.match(str(value).strip())
    if not match:
        raise UsageError(f"cannot parse window length {value!r} "
                         f"(expected seconds or an s/m/h suffix)")
    seconds = float(match.group(1)) * _DURATION_FACTOR[match.group(2)]
    if seconds <= 0:
        raise UsageError("window length must be positive")
    return timedelta(seconds=seconds)


def _parse_start(value) -> datetime:
    if isinstance(value, datetime):
        if value.tzinfo is None:
            value = value.replace(tzinfo=timezone.utc)
        return value.astimezone(timezone.utc)
    try:
        return parse_timestamp(str(value))
    except DataError as exc:
        raise UsageError(str(exc)) from exc


def _parse_grid(value, convert, name):
    if value is None:
        return None
    if isinstance(value, (list, tuple)):
        items = list(value)
    else:
        items = [piece for piece in str(value).split(",") if piece.strip()]
    try:
        grid = [convert(item) for item in items]
    except (TypeError, ValueError) as exc:
        raise UsageError(f"cannot parse {name} grid {value!r}") from exc
    if not grid:
        raise UsageError(f"{name} grid is empty")
    return grid


def _enum_by_value(enum_cls, value, name):
    try:
        return enum_cls(str(value))
    except ValueError as exc:
        choices = ", ".join(member.value for member in enum_cls)
        raise UsageError(f"invalid {name} {value!r} (choose from {choices})") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="eventdrift",
                     description="Detect events in a timestamped document "
                                 "stream by comparing per-window embedding "
                                 "cluster structure.")
    subparsers = parser.add_subparsers(dest="command", parser_class=_Parser)

    def add_common(sub, *, stream=True):
        sub.add_argument("--config", help="TOML config file; flags override it")
        if stream:
            sub.add_argument("--input", help="JSONL stream, one record per line")
            sub.add_argument("--start", help="stream start, ISO-8601")
            sub.add_argument("--window-len", dest="window_len",
                             help="window length: seconds or s/m/h suffix")
        sub.add_argument("--out", help="output file path")

    def add_model_flags(sub):
        sub.add_argument("--beta", type=int, help="outlier frequency threshold")
        sub.add_argument("--aggregation",
                         help="overall change aggregation: maximum or average")
        sub.add_argument("--preprocess",
                         help="vocabulary preprocessing: all_tokens, "
                              "no_punctuation or no_punctuation_no_stopwords")
        sub.add_argument("--dim", type=int, help="embedding dimension")
        sub.add_argument("--context", type=int, help="context window size")
        sub.add_argument("--min-count", dest="min_count", type=int,
                         help="minimum token frequency for training")
        sub.add_argument("--epochs", type=int, help="training epochs")
        sub.add_argument("--workers", type=int, help="parallel worker count")
        sub.add_argument("--seed", type=int, help="training seed")
        sub.add_argument("--stopwords", help="stop-word file, one token per line")
        sub.add_argument("--gt", help="ground-truth JSON file")

    detect = subparsers.add_parser("detect", help="run the full pipeline")
    add_common(detect)
    detect.add_argument("--alpha", type=float, help="event threshold in [0, 1]")
    add_model_flags(detect)
    detect.set_defaults(handler=_cmd_detect)

    evaluate = subparsers.add_parser("eval",
                                     help="score a detection report against "
                                          "ground truth")
    evaluate.add_argument("--config", help="TOML config file; flags override it")
    evaluate.add_argument("--input", help="detection report (JSON) to score")
    evaluate.add_argument("--gt", help="ground-truth JSON file")
    evaluate.add_argument("--out", help="metrics JSON output path")
    evaluate.set_defaults(handler=_cmd_eval)

    sweep = subparsers.add_parser("sweep", help="grid-evaluate alpha and beta")
    add_common(sweep)
    sweep.add_argument("--alpha", type=float, help=argparse.SUPPRESS)
    sweep.add_argument("--alphas", help="comma-separated alpha grid")
    sweep.add_argument("--betas", help="comma-separated beta grid")
    add_model_flags(sweep)
    sweep.set_defaults(handler=_cmd_sweep)

    chunk = subparsers.add_parser("chunk",
                                  help="emit window boundaries and counts")
    add_common(chunk)
    chunk.set_defaults(handler=_cmd_chunk)

    return parser


_CONFIG_KEYS = ("input", "start", "window_len", "alpha", "beta", "aggregation",
                "preprocess", "dim", "context", "min_count", "epochs",
                "workers", "seed", "gt", "out", "stopwords", "alphas", "betas")


def _merge_config(args) -> dict:
    """Start from the TOML config file, then let explicit flags win."""
    merged = {}
    config_path = getattr(args, "config", None)
    if config_path:
        path = Path(config_path)
        if not path.exists():
            raise DataError(f"config file not found: {path}")
        try:
            merged.update(tomllib.loads(path.read_text(encoding="utf-8")))
        except tomllib.TOMLDecodeError as exc:
            raise DataError(f"{path}: invalid TOML: {exc}") from exc
    for key in _CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _require(merged: dict, keys: tuple[str, ...]) -> None:
    missing = [key for key in keys if merged.get(key) is None]
    if missing:
        flags = ", ".join("--" + key.replace("_", "-") for key in missing)
        raise UsageError(f"missing required options: {flags}")


def _run_config(merged: dict, *, need_alpha: bool) -> RunConfig:
    _require(merged, ("input", "start", "window_len"))
    if need_alpha:
        _require(merged, ("alpha",))
    try:
        detector = DetectorConfig(
            alpha=float(merged.get("alpha", 0.0)),
            beta=int(merged.get("beta", 1)),
            aggregation=_enum_by_value(Aggregation,
                                       merged.get("aggregation", "maximum"),
                                       "aggregation"),
            preprocess=_enum_by_value(
                PreprocessMode,
                merged.get("preprocess", "no_punctuation_no_stopwords"),
                "preprocess"))
        embedding = EmbeddingConfig(
            dimension=int(merged.get("dim", 100)),
            context_size=int(merged.get("context", 5)),
            min_count=int(merged.get("min_count", 1)),
            epochs=int(merged.get("epochs", 5)),
            seed=int(merged.get("seed", 0)))
        return RunConfig(
            input_path=Path(merged["input"]),
            stream_start=_parse_start(merged["start"]),
            window_length=parse_window_length(merged["window_len"]),
            detector=detector,
            embedding=embedding,
            stopword_path=Path(merged["stopwords"]) if merged.get("stopwords") else None,
            gt_path=Path(merged["gt"]) if merged.get("gt") else None,
            workers=int(merged.get("workers", 1)),
            output_path=Path(merged["out"]) if merged.get("out") else None)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _cmd_detect(args) -> int:
    merged = _merge_config(args)
    config = _run_config(merged, need_alpha=True)
    report = run_detect(config)
    flagged = [rec for rec in report["results"] if rec["is_event"]]
    print(f"{len(report['windows'])} windows, {len(report['results'])} "
          f"pairs compared, {len(flagged)} event windows")
    for rec in flagged:
        print(f"event window {rec['window_index']} "
              f"[{rec['window_start']} .. {rec['window_end']}] "
              f"overall change {rec['overall_change']:.3f}")
    if config.output_path is not None:
        print(f"report written to {config.output_path}")
    return EXIT_OK


def _cmd_eval(args) -> int:
    merged = _merge_config(args)
    _require(merged, ("input", "gt"))
    out = Path(merged["out"]) if merged.get("out") else None
    metrics = run_eval(merged["input"], merged["gt"], out)
    for name in ("recall", "precision", "f1", "keyword_recall"):
        print(f"{name:<15}{getattr(metrics, name):.3f}")
    if out is not None:
        print(f"metrics written to {out}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    merged = _merge_config(args)
    _require(merged, ("gt",))
    alphas = _parse_grid(merged.get("alphas"), float, "alpha")
    betas = _parse_grid(merged.get("betas"), int, "beta")
    if alphas is None or betas is None:
        raise UsageError("sweep needs --alphas and --betas")
    config = _run_config(merged, need_alpha=False)
    rows = run_sweep(config, alphas, betas)
    best = rows[0]
    print(f"{len(rows)} settings evaluated; best f1 {best['f1']:.3f} "
          f"at alpha={best['alpha']:g} beta={best['beta']}")
    if config.output_path is not None:
        print(f"table written to {config.output_path}")
    return EXIT_OK


def _cmd_chunk(args) -> int:
    merged = _merge_config(args)
    config = _run_config(merged, need_alpha=False)
    payload = run_chunk(config)
    for rec in payload["windows"]:
        print(f"window {rec['index']:>4}  [{rec['start']} .. {rec['end']})  "
              f"{rec['documents']} documents, {rec['tokens']} tokens")
    if config.output_path is not None:
        print(f"window table written to {config.output_path}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if getattr(args, "handler", None) is None:
        parser.print_help()
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.handler(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

"""Ground-truth annotations and IR metrics over detection results."""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass
from datetime import datetime, timedelta
from pathlib import Path

from .corpus import DataError, parse_timestamp, tokenize
from .detection import WindowPairResult

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GtEvent:
    """One annotated event: any keyword of a synonym group matches the group;
    an event is found when at least one of its groups matches."""

    label: str
    synonym_groups: tuple[frozenset[str], ...]

    def __post_init__(self):
        if not self.synonym_groups or any(not g for g in self.synonym_groups):
            raise ValueError(f"event {self.label!r} needs nonempty synonym groups")


@dataclass(frozen=True)
class GroundTruth:
    windows: dict[int, tuple[GtEvent, ...]]


@dataclass(frozen=True)
class MetricsCounts:
    gt_windows: int
    detected_windows: int
    relevant_windows: int
    matched_groups: int
    total_groups: int


@dataclass(frozen=True)
class MetricsReport:
    recall: float
    precision: float
    f1: float
    keyword_recall: float
    counts: MetricsCounts

    def as_dict(self) -> dict:
        return asdict(self)


def load_ground_truth(path: str | Path, stream_start: datetime,
                      window_length: timedelta) -> GroundTruth:
    """Read annotations keyed by window start time and resolve each key to a
    window index on the chunking grid.

    Keywords pass through the corpus tokenizer, so matching against detected
    words is token-exact.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"ground-truth file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON") from exc
    if not isinstance(raw, dict):
        raise DataError(f"{path}: expected an object keyed by window start time")

    length = window_length.total_seconds()
    windows: dict[int, tuple[GtEvent, ...]] = {}
    for time_key, entries in raw.items():
        offset = (parse_timestamp(time_key) - stream_start).total_seconds()
        if offset < 0 or offset % length != 0:
            raise DataError(
                f"{path}: ground-truth time {time_key} does not sit on the "
                f"window grid (start {stream_start.isoformat()}, "
                f"length {length:g}s)")
        index = int(offset // length)
        events = []
        for entry in entries:
            label = str(entry.get("label", f"window-{index}-event"))
            groups = []
            for group in entry["synonym_groups"]:
                normalized = frozenset(
                    token for keyword in group for token in tokenize(keyword))
                if not normalized:
                    raise DataError(
                        f"{path}: synonym group {group!r} of event {label!r} "
                        f"normalizes to no tokens")
                groups.append(normalized)
            if not groups:
                raise DataError(f"{path}: event {label!r} has no synonym groups")
            events.append(GtEvent(label=label, synonym_groups=tuple(groups)))
        if not events:
            raise DataError(f"{path}: window {time_key} lists no events")
        windows[index] = tuple(events)
    return GroundTruth(windows=windows)


def window_is_relevant(detected_words: frozenset[str],
                       events: tuple[GtEvent, ...]) -> bool:
    """True iff every event is matched: some keyword of some synonym group
    appears among the detected words."""
    if not events:
        raise ValueError("relevance needs at least one event")
    return all(
        any(group & detected_words for group in event.synonym_groups)
        for event in events)


def compute_metrics(results: list[WindowPairResult],
                    gt: GroundTruth) -> MetricsReport:
    """Recall, precision, F1 over windows plus micro-averaged keyword recall
    over synonym groups."""
    if not gt.windows:
        raise ValueError("ground truth names no windows")
    flagged = {r.window_index: r for r in results if r.is_event}
    relevant = {
        index for index, result in flagged.items()
        if index in gt.windows
        and window_is_relevant(result.event_words, gt.windows[index])
    }

    matched_groups = 0
    total_groups = 0
    for index, events in gt.windows.items():
        words = flagged[index].event_words if index in flagged else frozenset()
        for event in events:
            total_groups += len(event.synonym_groups)
            matched_groups += sum(1 for g in event.synonym_groups if g & words)

    recall = len(relevant) / len(gt.windows)
    if flagged:
        precision = len(relevant) / len(flagged)
    else:
        logger.warning("no windows flagged, precision defined as 0")
        precision = 0.0
    f1 = (2 * precision * recall / (precision + recall)
          if precision + recall > 0 else 0.0)
    return MetricsReport(
        recall=recall, precision=precision, f1=f1,
        keyword_recall=matched_groups / total_groups,
        counts=MetricsCounts(
            gt_windows=len(gt.windows), detected_windows=len(flagged),
            relevant_windows=len(relevant), matched_groups=matched_groups,
            total_groups=total_groups))

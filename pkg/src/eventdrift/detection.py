"""Consecutive-window change computation: cluster change, vocabulary change,
their aggregation against the event threshold, and event word extraction."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .clustering import SimilarityMatrix, hac_average_linkage, similarity_matrix
from .corpus import PreprocessMode, TimeWindow, Vocabulary, build_vocabulary
from .embedding import EmbeddingModel

logger = logging.getLogger(__name__)


class Aggregation(Enum):
    MAXIMUM = "maximum"
    AVERAGE = "average"


@dataclass(frozen=True)
class DetectorConfig:
    alpha: float
    beta: int = 1
    aggregation: Aggregation = Aggregation.MAXIMUM
    preprocess: PreprocessMode = PreprocessMode.NO_PUNCTUATION_NO_STOPWORDS
    change_epsilon: float = 1e-9

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        if self.change_epsilon <= 0.0:
            raise ValueError("change_epsilon must be positive")


@dataclass(frozen=True)
class WindowPairResult:
    """Outcome for one (previous window, this window) comparison."""

    window_index: int
    cluster_change: float
    vocabulary_change: float
    overall_change: float
    is_event: bool
    event_words: frozenset[str]


@dataclass(frozen=True)
class PairComputation:
    """Identification-stage output with the changed cell pairs retained, so
    word extraction can run as its own stage."""

    window_index: int
    cluster_change: float
    vocabulary_change: float
    overall_change: float
    is_event: bool
    common_vocabulary: tuple[str, ...]
    changed_pairs: np.ndarray  # (k, 2) row/column indices, upper triangle

    def to_result(self) -> WindowPairResult:
        return WindowPairResult(
            window_index=self.window_index,
            cluster_change=self.cluster_change,
            vocabulary_change=self.vocabulary_change,
            overall_change=self.overall_change,
            is_event=self.is_event,
            event_words=words_from_changed_pairs(self.common_vocabulary,
                                                 self.changed_pairs))


def ordered_vocabulary(vocab: Vocabulary) -> tuple[str, ...]:
    """Deterministic matrix ordering: frequency descending, ties lexicographic."""
    return tuple(sorted(vocab, key=lambda t: (-vocab[t], t)))


def cluster_change(matrix_t: SimilarityMatrix,
                   matrix_t1: SimilarityMatrix) -> float:
    """Mean absolute cell difference over the strict upper triangle."""
    if matrix_t.vocabulary != matrix_t1.vocabulary:
        raise ValueError("matrices cover different vocabularies")
    n = len(matrix_t.vocabulary)
    if n < 2:
        return 0.0
    rows, cols = np.triu_indices(n, k=1)
    diff = np.abs(matrix_t1.cells[rows, cols] - matrix_t.cells[rows, cols])
    return float(diff.mean())


def vocabulary_change(vocab_t: Vocabulary, vocab_t1: Vocabulary) -> float:
    """Fraction of the newer vocabulary that is absent from the older one."""
    if not vocab_t1:
        logger.warning("empty newer vocabulary, vocabulary change defined as 0")
        return 0.0
    new = sum(1 for token in vocab_t1 if token not in vocab_t)
    return new / len(vocab_t1)


def overall_change(cluster: float, vocabulary: float,
                   aggregation: Aggregation) -> float:
    if aggregation is Aggregation.MAXIMUM:
        return max(cluster, vocabulary)
    return (cluster + vocabulary) / 2.0


def changed_pair_indices(matrix_t: SimilarityMatrix, matrix_t1: SimilarityMatrix,
                         change_epsilon: float) -> np.ndarray:
    """Upper-triangle (i, j) index pairs whose similarity moved by more than
    change_epsilon."""
    if matrix_t.vocabulary != matrix_t1.vocabulary:
        raise ValueError("matrices cover different vocabularies")
    n = len(matrix_t.vocabulary)
    rows, cols = np.triu_indices(n, k=1)
    moved = np.abs(matrix_t1.cells[rows, cols] - matrix_t.cells[rows, cols]) \
        > change_epsilon
    return np.column_stack([rows[moved], cols[moved]])


def words_from_changed_pairs(vocabulary: tuple[str, ...],
                             pairs: np.ndarray) -> frozenset[str]:
    return frozenset(vocabulary[i] for i in np.unique(pairs))


def extract_event_words(matrix_t: SimilarityMatrix, matrix_t1: SimilarityMatrix,
                        change_epsilon: float) -> frozenset[str]:
    """Both tokens of every pair whose similarity changed beyond epsilon."""
    pairs = changed_pair_indices(matrix_t, matrix_t1, change_epsilon)
    return words_from_changed_pairs(matrix_t.vocabulary, pairs)


def compare_windows(window_index: int, vocab_t: Vocabulary, vocab_t1: Vocabulary,
                    model_t: EmbeddingModel, model_t1: EmbeddingModel,
                    config: DetectorConfig) -> PairComputation:
    """Run the full change computation for one consecutive window pair.

    The preprocessed newer vocabulary serves as the common vocabulary for
    both similarity matrices; tokens a window's model does not cover take
    the zero-similarity convention, which makes brand-new words register as
    changed.
    """
    common = ordered_vocabulary(vocab_t1)
    if common:
        matrices = []
        for model in (model_t, model_t1):
            covered = [t for t in common if t in model]
            dendrogram = (hac_average_linkage(covered, model.vectors_for(covered))
                          if covered else None)
            matrices.append(similarity_matrix(dendrogram, common))
        c_change = cluster_change(matrices[0], matrices[1])
        pairs = changed_pair_indices(matrices[0], matrices[1],
                                     config.change_epsilon)
    else:
        c_change = 0.0
        pairs = np.empty((0, 2), dtype=np.int64)
    v_change = vocabulary_change(vocab_t, vocab_t1)
    overall = overall_change(c_change, v_change, config.aggregation)
    return PairComputation(window_index=window_index, cluster_change=c_change,
                           vocabulary_change=v_change, overall_change=overall,
                           is_event=bool(overall >= config.alpha),
                           common_vocabulary=common, changed_pairs=pairs)


def detect(windows: list[TimeWindow], models: list[EmbeddingModel],
           config: DetectorConfig,
           stopwords: frozenset[str] = frozenset()) -> list[WindowPairResult]:
    """Compare every consecutive window pair and flag event windows.

    The first window has no predecessor and emits no result; results arrive
    in window order.
    """
    if len(windows) < 2:
        raise ValueError("need at least two windows to compare")
    if len(models) != len(windows):
        raise ValueError(f"{len(windows)} windows but {len(models)} models")
    for window, model in zip(windows, models):
        if model.window_index != window.index:
            raise ValueError(f"model for window {model.window_index} paired "
                             f"with window {window.index}")

    vocabularies = [build_vocabulary(w, config.preprocess, config.beta, stopwords)
                    for w in windows]
    results = []
    for t in range(len(windows) - 1):
        computation = compare_windows(
            windows[t + 1].index, vocabularies[t], vocabularies[t + 1],
            models[t], models[t + 1], config)
        results.append(computation.to_result())
    return results

"""Event detection in timestamped document streams.

Per time window the pipeline trains Skip-gram token embeddings, clusters them
with average-linkage HAC, and compares consecutive windows through their
dendrogram-level similarity matrices and vocabularies; windows whose combined
change exceeds a threshold are flagged as event windows and the moved token
pairs become the event words.
"""

__version__ = "0.1.0"

from .clustering import (Dendrogram, SimilarityMatrix, cosine_distance_matrix,
                         hac_average_linkage, hac_from_distances,
                         similarity_matrix)
from .corpus import (DataError, Document, PreprocessMode, TimeWindow,
                     build_vocabulary, chunk_stream, is_punctuation_token,
                     load_stopwords, parse_timestamp, read_documents, tokenize)
from .detection import (Aggregation, DetectorConfig, WindowPairResult,
                        cluster_change, compare_windows, detect,
                        extract_event_words, ordered_vocabulary,
                        overall_change, vocabulary_change)
from .embedding import (EmbeddingConfig, EmbeddingModel, cosine_distance,
                        neg_sampling_gradients, neg_sampling_loss,
                        train_window_embeddings)
from .evaluation import (GroundTruth, GtEvent, MetricsCounts, MetricsReport,
                         compute_metrics, load_ground_truth,
                         window_is_relevant)
from .pipeline import (RunConfig, run_chunk, run_detect, run_eval, run_sweep)

__all__ = [
    "Aggregation",
    "DataError",
    "Dendrogram",
    "DetectorConfig",
    "Document",
    "EmbeddingConfig",
    "EmbeddingModel",
    "GroundTruth",
    "GtEvent",
    "MetricsCounts",
    "MetricsReport",
    "PreprocessMode",
    "RunConfig",
    "SimilarityMatrix",
    "TimeWindow",
    "WindowPairResult",
    "build_vocabulary",
    "chunk_stream",
    "cluster_change",
    "compare_windows",
    "compute_metrics",
    "cosine_distance",
    "cosine_distance_matrix",
    "detect",
    "extract_event_words",
    "hac_average_linkage",
    "hac_from_distances",
    "is_punctuation_token",
    "load_ground_truth",
    "load_stopwords",
    "neg_sampling_gradients",
    "neg_sampling_loss",
    "ordered_vocabulary",
    "overall_change",
    "parse_timestamp",
    "read_documents",
    "run_chunk",
    "run_detect",
    "run_eval",
    "run_sweep",
    "similarity_matrix",
    "tokenize",
    "train_window_embeddings",
    "vocabulary_change",
    "window_is_relevant",
]

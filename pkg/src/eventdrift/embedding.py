"""Per-window Skip-gram word embeddings, trained from scratch with negative
sampling on numpy."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import DataError, TimeWindow

_MAGIC = "eventdrift-embedding"
_FORMAT_VERSION = 1
_LR_FLOOR_FACTOR = 1e-4
_EVAL_SAMPLE_SIZE = 2000
_SIGMOID_CLIP = 60.0


@dataclass(frozen=True)
class EmbeddingConfig:
    dimension: int = 100
    context_size: int = 5
    min_count: int = 1
    epochs: int = 5
    learning_rate: float = 0.025
    negatives_per_sample: int = 5
    noise_exponent: float = 0.75
    batch_size: int = 4096
    update_clip: float = 4.0
    seed: int = 0

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if self.context_size < 1:
            raise ValueError("context_size must be >= 1")
        if self.min_count < 1:
            raise ValueError("min_count must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.negatives_per_sample < 1:
            raise ValueError("negatives_per_sample must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.update_clip <= 0:
            raise ValueError("update_clip must be positive")


@dataclass(eq=False)
class EmbeddingModel:
    """Token vectors for one time window (the input-layer weights)."""

    window_index: int
    tokens: tuple[str, ...]
    matrix: np.ndarray
    config: EmbeddingConfig
    epoch_losses: tuple[float, ...] = ()
    _index: dict = field(init=False, repr=False)

    def __post_init__(self):
        self._index = {t: i for i, t in enumerate(self.tokens)}

    @property
    def is_empty(self) -> bool:
        return not self.tokens

    @property
    def coverage(self) -> frozenset[str]:
        return frozenset(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def vector(self, token: str) -> np.ndarray:
        return self.matrix[self._index[token]]

    def vectors_for(self, tokens: list[str]) -> np.ndarray:
        rows = [self._index[t] for t in tokens]
        return self.matrix[rows]

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(f"{_MAGIC} {_FORMAT_VERSION}\n")
            handle.write(f"window_index {self.window_index}\n")
            handle.write(f"seed {self.config.seed}\n")
            handle.write(f"dimension {self.config.dimension}\n")
            handle.write(f"count {len(self.tokens)}\n")
            for token, row in zip(self.tokens, self.matrix):
                floats = " ".join(repr(float(x)) for x in row)
                handle.write(f"{token}\t{floats}\n")

    @classmethod
    def load(cls, path: str | Path) -> "EmbeddingModel":
        with open(path, encoding="utf-8") as handle:
            header = handle.readline().split()
            if header[:1] != [_MAGIC] or len(header) != 2:
                raise DataError(f"{path}: not an embedding file")
            if int(header[1]) != _FORMAT_VERSION:
                raise DataError(f"{path}: unsupported format version {header[1]}")
            meta = {}
            for _ in range(4):
                key, value = handle.readline().split()
                meta[key] = int(value)
            tokens, rows = [], []
            for line in handle:
                token, floats = line.rstrip("\n").split("\t")
                tokens.append(token)
                rows.append([float(x) for x in floats.split()])
        if len(tokens) != meta["count"]:
            raise DataError(f"{path}: expected {meta['count']} rows, found {len(tokens)}")
        matrix = np.array(rows, dtype=np.float32).reshape(len(tokens), meta["dimension"])
        matrix.flags.writeable = False
        config = EmbeddingConfig(dimension=meta["dimension"], seed=meta["seed"])
        return cls(window_index=meta["window_index"], tokens=tuple(tokens),
                   matrix=matrix, config=config)


# --------------------------------------------------------------------------
# negative-sampling objective (single pair, float64; used by gradient checks)
# --------------------------------------------------------------------------

def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-np.clip(x, -_SIGMOID_CLIP, _SIGMOID_CLIP)))


def neg_sampling_loss(center: np.ndarray, context: np.ndarray,
                      negatives: np.ndarray) -> float:
    """Loss for one (center, context) pair against explicit negative rows:
    -log sigma(c.o) - sum_k log sigma(-c.n_k)."""
    center = np.asarray(center, dtype=np.float64)
    context = np.asarray(context, dtype=np.float64)
    negatives = np.asarray(negatives, dtype=np.float64)
    pos = np.logaddexp(0.0, -center @ context)
    neg = np.logaddexp(0.0, negatives @ center).sum()
    return float(pos + neg)


def neg_sampling_gradients(center: np.ndarray, context: np.ndarray,
                           negatives: np.ndarray):
    """Analytic gradients of neg_sampling_loss w.r.t. all three arguments."""
    center = np.asarray(center, dtype=np.float64)
    context = np.asarray(context, dtype=np.float64)
    negatives = np.asarray(negatives, dtype=np.float64)
    g_pos = _sigmoid(center @ context) - 1.0
    g_neg = _sigmoid(negatives @ center)
    grad_center = g_pos * context + g_neg @ negatives
    grad_context = g_pos * center
    grad_negatives = g_neg[:, None] * center[None, :]
    return grad_center, grad_context, grad_negatives


# --------------------------------------------------------------------------
# training
# --------------------------------------------------------------------------

def _scatter_add(matrix: np.ndarray, rows: np.ndarray, grads: np.ndarray,
                 scale: float, clip: float) -> None:
    # duplicate row ids are summed before the single indexed add
    order = np.argsort(rows, kind="stable")
    rows_sorted = rows[order]
    grads_sorted = grads[order]
    starts = np.flatnonzero(np.r_[True, rows_sorted[1:] != rows_sorted[:-1]])
    totals = np.add.reduceat(grads_sorted, starts, axis=0)
    # small vocabularies pile hundreds of collided contributions onto one
    # row; an uncapped sum overshoots and diverges
    norms = np.sqrt(np.einsum("rd,rd->r", totals, totals))
    np.maximum(norms, clip, out=norms)
    totals *= (clip / norms)[:, None]
    matrix[rows_sorted[starts]] += scale * totals


def _batch_update(w_in, w_out, centers, contexts, negatives, lr, clip):
    h = w_in[centers]
    vo = w_out[contexts]
    vn = w_out[negatives]
    g_pos = _sigmoid(np.einsum("bd,bd->b", h, vo)) - 1.0
    g_neg = _sigmoid(np.einsum("bd,bkd->bk", h, vn))
    g_neg *= negatives != contexts[:, None]  # a resampled true context must not repel
    grad_h = g_pos[:, None] * vo + np.einsum("bk,bkd->bd", g_neg, vn)
    grad_ctx = g_pos[:, None] * h
    grad_negs = (g_neg[..., None] * h[:, None, :]).reshape(-1, h.shape[1])
    _scatter_add(w_in, centers, grad_h, -lr, clip)
    _scatter_add(w_out, np.concatenate([contexts, negatives.reshape(-1)]),
                 np.concatenate([grad_ctx, grad_negs]), -lr, clip)


def _batch_loss(w_in, w_out, centers, contexts, negatives) -> float:
    h = w_in[centers].astype(np.float64)
    pos = np.einsum("bd,bd->b", h, w_out[contexts].astype(np.float64))
    neg = np.einsum("bd,bkd->bk", h, w_out[negatives].astype(np.float64))
    per_neg = np.logaddexp(0.0, neg) * (negatives != contexts[:, None])
    return float(np.mean(np.logaddexp(0.0, -pos) + per_neg.sum(axis=1)))


def _skipgram_pairs(flat_ids: np.ndarray, doc_ids: np.ndarray,
                    context_size: int) -> tuple[np.ndarray, np.ndarray]:
    """All (center, context) id pairs within a fixed window, never crossing
    document boundaries."""
    centers, contexts = [], []
    for delta in range(1, context_size + 1):
        if delta >= len(flat_ids):
            break
        left, right = flat_ids[:-delta], flat_ids[delta:]
        same_doc = doc_ids[:-delta] == doc_ids[delta:]
        centers.append(left[same_doc])
        contexts.append(right[same_doc])
        centers.append(right[same_doc])
        contexts.append(left[same_doc])
    if not centers:
        empty = np.empty(0, dtype=np.int32)
        return empty, empty.copy()
    return np.concatenate(centers), np.concatenate(contexts)


def _draw_negatives(rng, noise_cumulative, shape):
    idx = np.searchsorted(noise_cumulative, rng.random(shape), side="right")
    return np.minimum(idx, len(noise_cumulative) - 1).astype(np.int32)


def train_window_embeddings(window: TimeWindow,
                            config: EmbeddingConfig) -> EmbeddingModel:
    """Train Skip-gram vectors on one window's raw token sequences.

    Runs stochastic gradient descent with negative sampling, a linearly
    decaying learning rate and per-row clipping of each batch's summed
    gradient.  Deterministic for a fixed (seed, window index) at a single
    worker.  A window with no eligible tokens yields an empty model, which
    downstream change computation treats as zero coverage.
    """
    counts = window.raw_vocabulary
    eligible = sorted((t for t, c in counts.items() if c >= config.min_count),
                      key=lambda t: (-counts[t], t))
    if not eligible:
        return EmbeddingModel(window_index=window.index, tokens=(),
                              matrix=np.zeros((0, config.dimension), dtype=np.float32),
                              config=config)

    index = {t: i for i, t in enumerate(eligible)}
    rng = np.random.default_rng([config.seed, window.index])
    w_in = (rng.random((len(eligible), config.dimension), dtype=np.float32) - 0.5) \
        / config.dimension
    w_out = np.zeros_like(w_in)

    flat_ids, doc_ids = [], []
    for doc_no, seq in enumerate(window.token_sequences):
        kept = [index[t] for t in seq if t in index]
        flat_ids.extend(kept)
        doc_ids.extend([doc_no] * len(kept))
    centers, contexts = _skipgram_pairs(
        np.asarray(flat_ids, dtype=np.int32), np.asarray(doc_ids, dtype=np.int64),
        config.context_size)
    n_pairs = len(centers)

    losses: list[float] = []
    if n_pairs:
        freq = np.array([counts[t] for t in eligible], dtype=np.float64)
        noise = freq ** config.noise_exponent
        cumulative = np.cumsum(noise / noise.sum())
        cumulative[-1] = 1.0

        k = min(_EVAL_SAMPLE_SIZE, n_pairs)
        eval_c, eval_o = centers[:k], contexts[:k]
        eval_negs = _draw_negatives(rng, cumulative,
                                    (k, config.negatives_per_sample))
        losses.append(_batch_loss(w_in, w_out, eval_c, eval_o, eval_negs))

        total = config.epochs * n_pairs
        processed = 0
        floor = config.learning_rate * _LR_FLOOR_FACTOR
        for _ in range(config.epochs):
            perm = rng.permutation(n_pairs)
            for lo in range(0, n_pairs, config.batch_size):
                sel = perm[lo:lo + config.batch_size]
                lr = max(config.learning_rate * (1.0 - processed / total), floor)
                negs = _draw_negatives(rng, cumulative,
                                       (len(sel), config.negatives_per_sample))
                _batch_update(w_in, w_out, centers[sel], contexts[sel], negs,
                              lr, config.update_clip)
                processed += len(sel)
            losses.append(_batch_loss(w_in, w_out, eval_c, eval_o, eval_negs))

    w_in.flags.writeable = False
    return EmbeddingModel(window_index=window.index, tokens=tuple(eligible),
                          matrix=w_in, config=config, epoch_losses=tuple(losses))


def cosine_distance(u: np.ndarray, v: np.ndarray) -> float:
    """1 - cos(u, v), clamped to [0, 2]."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine distance undefined for a zero vector")
    return float(min(2.0, max(0.0, 1.0 - (u @ v) / (nu * nv))))

"""Average-linkage hierarchical clustering of token vectors and the
dendrogram-level similarity it induces between tokens."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np


def cosine_distance_matrix(vectors: np.ndarray) -> np.ndarray:
    """Pairwise cosine distances, symmetrized with a zero diagonal."""
    v = np.asarray(vectors, dtype=np.float64)
    if v.ndim != 2 or v.shape[0] < 1:
        raise ValueError("expected a non-empty 2d array of vectors")
    norms = np.linalg.norm(v, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise ValueError(f"zero vector at row {zero[0]}, cannot normalize")
    unit = v / norms[:, None]
    dist = 1.0 - unit @ unit.T
    dist = (dist + dist.T) / 2.0
    np.clip(dist, 0.0, 2.0, out=dist)
    np.fill_diagonal(dist, 0.0)
    return dist


@dataclass(frozen=True)
class Dendrogram:
    """Binary merge tree over tokens.

    Leaves are nodes 0..n-1 in `leaves` order; merge k joins the two listed
    node ids into new node n+k.  Each merge is stored as
    (smaller_id, larger_id, merge_distance).
    """

    leaves: tuple[str, ...]
    merges: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        n = len(self.leaves)
        if n < 1:
            raise ValueError("a dendrogram needs at least one leaf")
        if len(self.merges) != n - 1:
            raise ValueError(f"{n} leaves require {n - 1} merges, "
                             f"got {len(self.merges)}")
        seen = set()
        for k, (left, right, _) in enumerate(self.merges):
            new_id = n + k
            if not (0 <= left < right < new_id):
                raise ValueError(f"merge {k}: invalid child pair ({left}, {right})")
            if left in seen or right in seen:
                raise ValueError(f"merge {k}: node merged twice")
            seen.update((left, right))

    @property
    def n_leaves(self) -> int:
        return len(self.leaves)

    @property
    def n_nodes(self) -> int:
        return 2 * len(self.leaves) - 1

    @cached_property
    def _leaf_ids(self) -> dict:
        return {t: i for i, t in enumerate(self.leaves)}

    @cached_property
    def _parents(self) -> np.ndarray:
        parents = np.full(self.n_nodes, -1, dtype=np.int64)
        n = self.n_leaves
        for k, (left, right, _) in enumerate(self.merges):
            parents[left] = parents[right] = n + k
        return parents

    @cached_property
    def node_depths(self) -> np.ndarray:
        """Depth of every node counting the root as 1."""
        depths = np.zeros(self.n_nodes, dtype=np.int64)
        depths[self.n_nodes - 1] = 1
        for node in range(self.n_nodes - 2, -1, -1):
            depths[node] = depths[self._parents[node]] + 1
        return depths

    @cached_property
    def max_levels(self) -> int:
        """Levels on the longest root-to-leaf path; the similarity denominator."""
        return int(self.node_depths[: self.n_leaves].max())

    def __contains__(self, token: str) -> bool:
        return token in self._leaf_ids

    def dl_similarity(self, w_i: str, w_j: str) -> float:
        """Shared levels from the root for two leaf tokens, normalized to
        [0, 1]; 1 exactly for a token with itself."""
        for token in (w_i, w_j):
            if token not in self._leaf_ids:
                raise ValueError(f"token {token!r} is not a leaf of this dendrogram")
        if w_i == w_j:
            return 1.0
        a = self._leaf_ids[w_i]
        b = self._leaf_ids[w_j]
        depths, parents = self.node_depths, self._parents
        while a != b:
            if depths[a] >= depths[b]:
                a = parents[a]
            else:
                b = parents[b]
        return float(depths[a]) / self.max_levels

    def dump(self, path: str | Path) -> None:
        """Write the merge list, one `left right distance` row per line."""
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(f"# {self.n_leaves} leaves\n")
            for token in self.leaves:
                handle.write(f"leaf {token}\n")
            for left, right, dist in self.merges:
                handle.write(f"{left} {right} {dist!r}\n")


@dataclass(frozen=True)
class SimilarityMatrix:
    """Symmetric token-by-token matrix of dendrogram-level similarities."""

    vocabulary: tuple[str, ...]
    cells: np.ndarray

    def __post_init__(self):
        n = len(self.vocabulary)
        if self.cells.shape != (n, n):
            raise ValueError(f"cells shape {self.cells.shape} does not match "
                             f"vocabulary size {n}")


# --------------------------------------------------------------------------
# clustering
# --------------------------------------------------------------------------

def _average_linkage_merges(dist: np.ndarray) -> list[tuple[int, int, float]]:
    """Greedy merge sequence under the exact average-linkage recurrence.

    Ties on the minimum distance break toward the lexicographically smallest
    (smaller id, larger id) pair of active cluster ids.
    """
    n = len(dist)
    d = dist.astype(np.float64).copy()
    np.fill_diagonal(d, np.inf)
    active = np.ones(n, dtype=bool)
    ids = np.arange(n)
    sizes = np.ones(n, dtype=np.int64)
    row_min = d.min(axis=1)
    row_arg = d.argmin(axis=1)

    merges: list[tuple[int, int, float]] = []
    for step in range(n - 1):
        slots = np.flatnonzero(active)
        gmin = row_min[slots].min()
        best_ids, best_slots = None, None
        for i in slots:
            if row_min[i] != gmin:
                continue
            for j in np.flatnonzero(d[i] == gmin):
                pair_ids = (int(min(ids[i], ids[j])), int(max(ids[i], ids[j])))
                if best_ids is None or pair_ids < best_ids:
                    best_ids, best_slots = pair_ids, (i, j)
        a, b = best_slots
        merges.append((best_ids[0], best_ids[1], float(gmin)))

        wa, wb = sizes[a], sizes[b]
        merged = (wa * d[a] + wb * d[b]) / (wa + wb)
        d[a, :] = merged
        d[:, a] = merged
        d[a, a] = np.inf
        d[b, :] = np.inf
        d[:, b] = np.inf
        active[b] = False
        ids[a] = n + step
        sizes[a] += sizes[b]

        if step == n - 2:
            break
        for i in np.flatnonzero(active):
            if i == a or row_arg[i] == a or row_arg[i] == b:
                row_arg[i] = d[i].argmin()
                row_min[i] = d[i, row_arg[i]]
            elif d[i, a] < row_min[i]:
                row_min[i] = d[i, a]
                row_arg[i] = a
    return merges


def hac_from_distances(tokens: tuple[str, ...] | list[str],
                       distances: np.ndarray) -> Dendrogram:
    """Cluster tokens given a precomputed symmetric distance matrix."""
    tokens = tuple(tokens)
    if not tokens:
        raise ValueError("cannot cluster zero tokens")
    if len(tokens) == 1:
        return Dendrogram(leaves=tokens, merges=())
    merges = _average_linkage_merges(np.asarray(distances, dtype=np.float64))
    return Dendrogram(leaves=tokens, merges=tuple(merges))


def hac_average_linkage(tokens: tuple[str, ...] | list[str],
                        vectors: np.ndarray) -> Dendrogram:
    """Cluster tokens bottom-up under average-linkage cosine distance."""
    tokens = tuple(tokens)
    if not tokens:
        raise ValueError("cannot cluster zero tokens")
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.shape[0] != len(tokens):
        raise ValueError(f"{len(tokens)} tokens but {vectors.shape[0]} vectors")
    if len(tokens) == 1:
        return Dendrogram(leaves=tokens, merges=())
    try:
        distances = cosine_distance_matrix(vectors)
    except ValueError as exc:
        norms = np.linalg.norm(vectors, axis=1)
        zero = np.flatnonzero(norms == 0.0)
        if zero.size:
            raise ValueError(
                f"token {tokens[zero[0]]!r} has a zero vector, cannot cluster"
            ) from exc
        raise
    return hac_from_distances(tokens, distances)


def similarity_matrix(dendrogram: Dendrogram | None,
                      vocabulary: tuple[str, ...] | list[str]) -> SimilarityMatrix:
    """Dendrogram-level similarities over an ordered vocabulary.

    Tokens absent from the dendrogram (not covered by this window's model)
    score 0 against everything and 1 with themselves.  With no dendrogram at
    all the result is the identity pattern.
    """
    vocabulary = tuple(vocabulary)
    if not vocabulary:
        raise ValueError("vocabulary must be nonempty")
    n = len(vocabulary)
    cells = np.zeros((n, n), dtype=np.float64)
    if dendrogram is not None:
        rows = {t: i for i, t in enumerate(vocabulary)}
        denominator = dendrogram.max_levels
        depths = dendrogram.node_depths
        members: dict[int, np.ndarray] = {
            leaf_id: np.array([rows[token]], dtype=np.int64)
            for leaf_id, token in enumerate(dendrogram.leaves)
            if token in rows
        }
        n_leaves = dendrogram.n_leaves
        for k, (left, right, _) in enumerate(dendrogram.merges):
            new_id = n_leaves + k
            ra = members.pop(left, None)
            rb = members.pop(right, None)
            if ra is None and rb is None:
                continue
            if ra is None or rb is None:
                members[new_id] = rb if ra is None else ra
                continue
            value = float(depths[new_id]) / denominator
            cells[np.ix_(ra, rb)] = value
            cells[np.ix_(rb, ra)] = value
            members[new_id] = np.concatenate([ra, rb])
    np.fill_diagonal(cells, 1.0)
    cells.flags.writeable = False
    return SimilarityMatrix(vocabulary=vocabulary, cells=cells)

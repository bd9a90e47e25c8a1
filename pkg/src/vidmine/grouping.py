"""Average-linkage agglomeration of shots and query-by-example ranking."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, InputError, ShapeError


@dataclass
class Dendrogram:
    """Merge history.

    Leaves are clusters ``0 .. n_leaves-1``; the cluster created by merge
    ``t`` gets id ``n_leaves + t``. Each merge is ``(a, b, similarity)`` with
    ``a < b``.
    """

    n_leaves: int
    merges: list = field(default_factory=list)

    def to_dict(self):
        return {"merges": [[int(a), int(b), float(s)] for a, b, s in self.merges]}


def cosine_sim(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"descriptor shapes differ: {a.shape} vs {b.shape}")
    return float(np.clip(a @ b, -1.0, 1.0))


def similarity_matrix(descriptors) -> np.ndarray:
    X = np.asarray(descriptors, dtype=np.float64)
    return np.clip(X @ X.T, -1.0, 1.0)


def agglomerate(descriptors, n_clusters: Optional[int] = None, floor: Optional[float] = None):
    """Bottom-up average-linkage clustering under cosine similarity.

    Merges stop when ``n_clusters`` remain or when the best available
    average similarity drops below ``floor``; with neither given everything
    is merged. Ties go to the pair with the lowest cluster ids.

    Returns ``(dendrogram, labels)``. Surviving clusters are numbered in
    order of creation.
    """
    X = np.asarray(descriptors, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise InputError("agglomerate needs at least one descriptor")
    n = X.shape[0]
    if n_clusters is None:
        n_clusters = 1
    if not 1 <= n_clusters <= n:
        raise ConfigError(f"target cluster count must be in [1, {n}], got {n_clusters}")

    # totals[a, b] = sum of pairwise similarities between active clusters a, b
    totals = similarity_matrix(X)
    ids = list(range(n))
    sizes = [1] * n
    members = [[i] for i in range(n)]
    dendro = Dendrogram(n)

    while len(ids) > n_clusters:
        m = len(ids)
        size = np.asarray(sizes, dtype=np.float64)
        avg = totals / np.outer(size, size)
        avg[np.tril_indices(m)] = -np.inf
        flat = int(np.argmax(avg))
        a, b = divmod(flat, m)
        sim = float(avg[a, b])
        if floor is not None and sim < floor:
            break
        dendro.merges.append((ids[a], ids[b], sim))

        row = totals[a] + totals[b]
        keep = [t for t in range(m) if t not in (a, b)]
        new = np.empty((m - 1, m - 1))
        new[:-1, :-1] = totals[np.ix_(keep, keep)]
        new[-1, :-1] = new[:-1, -1] = row[keep]
        new[-1, -1] = totals[a, a] + totals[b, b] + 2 * totals[a, b]
        totals = new
        merged = members[a] + members[b]
        new_size = sizes[a] + sizes[b]
        ids = [ids[t] for t in keep] + [n + len(dendro.merges) - 1]
        sizes = [sizes[t] for t in keep] + [new_size]
        members = [members[t] for t in keep] + [merged]

    labels = np.empty(n, dtype=int)
    for label, mem in enumerate(members):
        labels[mem] = label
    return dendro, labels


def query_shots(query, shot_descriptors, top_k: int = 10):
    """Rank shots by cosine similarity to ``query``.

    Returns a list of ``(shot_id, similarity)``, best first, lower id first on
    ties, at most ``top_k`` long.
    """
    if top_k < 1:
        raise ConfigError(f"top_k must be >= 1, got {top_k}")
    S = np.asarray(shot_descriptors, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] == 0:
        raise InputError("no shots to query")
    q = np.asarray(query, dtype=np.float64)
    if q.shape != (S.shape[1],):
        raise ShapeError(f"query has shape {q.shape}, shots have dimension {S.shape[1]}")
    sims = np.clip(S @ q, -1.0, 1.0)
    order = np.lexsort((np.arange(len(sims)), -sims))[:top_k]
    return [(int(i), float(sims[i])) for i in order]

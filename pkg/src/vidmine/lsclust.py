"""Cohesion-maximizing clustering of unit vectors.

The objective of a partition ``P = (S_1, ..., S_K)`` is

    E(P) = sum_i ||D_i||,    D_i = sum of the vectors in S_i,

which equals ``sum_i sum_{d in S_i} d . c_i`` with concept vectors
``c_i = D_i / ||D_i||``. Spherical k-means reassigns a vector when
``d . (c_j - c_i) > 0``; the single-move local search here instead evaluates
the exact change of ``E`` for every one-vector relocation and applies the
best one. The exact gain is never smaller than the k-means test value, so
local search can keep improving partitions at which k-means has stalled.

Exact gain of moving unit vector ``d`` from cluster ``i`` to cluster ``j``::

    sqrt(||D_i||^2 - 2 ||D_i|| d.c_i + 1) - ||D_i||
  + sqrt(||D_j||^2 + 2 ||D_j|| d.c_j + 1) - ||D_j||
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError, DegenerateInputError, EmptyClusterError, InputError

UNIT_TOL = 1e-9
ALGORITHMS = ("lsc", "kmeans", "kmeans-then-lsc")


@dataclass
class LscConfig:
    """Run parameters shared by the local-search and k-means drivers.

    ``max_moves=None`` means ``10 * N * K``.
    """

    seed: int = 0
    max_moves: Optional[int] = None
    epsilon: float = 1e-12
    restarts: int = 1
    refresh_interval: int = 256
    workers: int = 1

    def __post_init__(self):
        if self.max_moves is not None and self.max_moves < 1:
            raise ConfigError(f"max_moves must be >= 1, got {self.max_moves}")
        if self.epsilon < 0:
            raise ConfigError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.restarts < 1:
            raise ConfigError(f"restarts must be >= 1, got {self.restarts}")
        if self.refresh_interval < 1:
            raise ConfigError(f"refresh_interval must be >= 1, got {self.refresh_interval}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")

    def move_budget(self, n, k):
        return self.max_moves if self.max_moves is not None else 10 * n * k


@dataclass(frozen=True)
class ClusterState:
    members: np.ndarray
    sum_vector: np.ndarray
    norm: float
    concept: np.ndarray


@dataclass(frozen=True)
class MoveDelta:
    doc: int
    source: int
    target: int
    gain: float


def check_descriptors(descriptors) -> np.ndarray:
    """Return descriptors as a float64 ``(N, dim)`` array; each row must be unit length."""
    X = np.ascontiguousarray(descriptors, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise InputError(f"descriptors must be a non-empty 2-d array, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InputError("descriptors contain non-finite values")
    norms = np.linalg.norm(X, axis=1)
    bad = np.flatnonzero(np.abs(norms - 1.0) > UNIT_TOL)
    if bad.size:
        raise InputError(
            f"descriptor {bad[0]} has norm {norms[bad[0]]!r}; all descriptors must be unit length"
        )
    return X


class Partition:
    """K non-empty clusters over N unit vectors, with cached cluster sums.

    The sum vectors are updated incrementally by :meth:`move` and rebuilt from
    the members every ``refresh_interval`` moves to bound rounding drift.
    """

    def __init__(self, descriptors, assignment, k=None, refresh_interval=256, check=True):
        X = check_descriptors(descriptors) if check else descriptors
        labels = np.array(assignment, dtype=np.intp)
        if labels.shape != (X.shape[0],):
            raise InputError(
                f"assignment has shape {labels.shape}, expected ({X.shape[0]},)"
            )
        if k is None:
            k = int(labels.max()) + 1
        if labels.min() < 0 or labels.max() >= k:
            raise InputError(f"assignment values must lie in [0, {k})")
        self.X = X
        self.labels = labels
        self.k = int(k)
        self.refresh_interval = refresh_interval
        self.trace: list[float] = []
        self.n_moves = 0
        self.converged = False
        self.seed: Optional[int] = None
        self._since_refresh = 0
        self.refresh()
        empty = np.flatnonzero(self.counts == 0)
        if empty.size:
            raise InputError(f"cluster {empty[0]} is empty")

    @property
    def n(self):
        return self.X.shape[0]

    def refresh(self):
        """Recompute every cluster sum from its members."""
        sums = np.zeros((self.k, self.X.shape[1]))
        np.add.at(sums, self.labels, self.X)
        self.sums = sums
        self.counts = np.bincount(self.labels, minlength=self.k)
        self.norms = np.linalg.norm(sums, axis=1)
        self._since_refresh = 0
        self._check_norms(range(self.k))

    def _check_norms(self, clusters):
        for i in clusters:
            if self.counts[i] > 0 and not self.norms[i] > 1e-12:
                raise DegenerateInputError(f"cluster {i} has a zero sum vector")

    @property
    def concepts(self):
        return self.sums / self.norms[:, None]

    def cluster(self, i) -> ClusterState:
        return ClusterState(
            members=np.flatnonzero(self.labels == i),
            sum_vector=self.sums[i].copy(),
            norm=float(self.norms[i]),
            concept=self.sums[i] / self.norms[i],
        )

    def clusters(self):
        return [self.cluster(i) for i in range(self.k)]

    def move(self, doc, target):
        source = self.labels[doc]
        if target == source:
            raise ValueError(f"doc {doc} is already in cluster {target}")
        if self.counts[source] < 2:
            raise EmptyClusterError(f"moving doc {doc} would empty cluster {source}")
        d = self.X[doc]
        self.labels[doc] = target
        self.counts[source] -= 1
        self.counts[target] += 1
        self._since_refresh += 1
        if self._since_refresh >= self.refresh_interval:
            self.refresh()
            return
        self.sums[source] -= d
        self.sums[target] += d
        self.norms[source] = np.linalg.norm(self.sums[source])
        self.norms[target] = np.linalg.norm(self.sums[target])
        self._check_norms((source, target))

    def copy(self):
        other = Partition.__new__(Partition)
        other.__dict__.update(self.__dict__)
        for name in ("labels", "sums", "counts", "norms"):
            setattr(other, name, getattr(self, name).copy())
        other.trace = list(self.trace)
        return other

    def __repr__(self):
        return f"Partition(n={self.n}, k={self.k}, objective={objective(self):.6f})"


def cohesion(cluster: ClusterState) -> float:
    """Norm of the cluster's sum vector."""
    return float(np.linalg.norm(cluster.sum_vector))


def objective(p: Partition) -> float:
    return float(p.norms.sum())


def _check_move(p, doc, target):
    source = int(p.labels[doc])
    if not 0 <= target < p.k:
        raise ValueError(f"target cluster {target} outside [0, {p.k})")
    if target == source:
        raise ValueError(f"target equals source cluster {source}")
    return source


def kmeans_delta(p: Partition, doc: int, target: int) -> float:
    """k-means reassignment score ``d . (c_target - c_source)``."""
    source = _check_move(p, doc, target)
    d = p.X[doc]
    c = p.concepts
    return float(d @ c[target] - d @ c[source])


def _removal_gain(norm, dc):
    return np.sqrt(np.maximum(norm * norm - 2.0 * norm * dc + 1.0, 0.0)) - norm


def _insertion_gain(norm, dc):
    return np.sqrt(np.maximum(norm * norm + 2.0 * norm * dc + 1.0, 0.0)) - norm


def incremental_delta(p: Partition, doc: int, target: int) -> float:
    """Exact objective change of relocating ``doc`` to ``target``, from cached sums."""
    source = _check_move(p, doc, target)
    if p.counts[source] < 2:
        raise EmptyClusterError(f"moving doc {doc} would empty cluster {source}")
    d = p.X[doc]
    ni, nj = p.norms[source], p.norms[target]
    dci = d @ p.sums[source] / ni
    dcj = d @ p.sums[target] / nj
    return float(_removal_gain(ni, dci) + _insertion_gain(nj, dcj))


def move_gains(p: Partition) -> np.ndarray:
    """``(N, K)`` matrix of exact move gains; ``-inf`` marks disallowed moves."""
    dc = (p.X @ p.sums.T) / p.norms
    rows = np.arange(p.n)
    src = p.labels
    removal = _removal_gain(p.norms[src], dc[rows, src])
    gains = removal[:, None] + _insertion_gain(p.norms[None, :], dc)
    gains[rows, src] = -np.inf
    gains[p.counts[src] < 2, :] = -np.inf
    return gains


def best_move(p: Partition, epsilon: float = 1e-12) -> Optional[MoveDelta]:
    """Steepest-ascent choice over all single relocations.

    Ties go to the lowest doc id, then the lowest target cluster. Returns None
    when no move gains more than ``epsilon``.
    """
    if p.k < 2:
        return None
    gains = move_gains(p)
    flat = int(np.argmax(gains))  # row-major: first max is lowest doc, then lowest target
    doc, target = divmod(flat, p.k)
    gain = float(gains[doc, target])
    if not gain > epsilon:
        return None
    return MoveDelta(doc, int(p.labels[doc]), target, gain)


def tcls_step(p: Partition, epsilon: float = 1e-12):
    """Apply the best improving move in place. Returns ``(p, move_or_None)``."""
    mv = best_move(p, epsilon)
    if mv is not None:
        p.move(mv.doc, mv.target)
        p.n_moves += 1
    return p, mv


def init_partition(descriptors, k: int, seed: int = 0, refresh_interval=256) -> Partition:
    """Seeded random partition with no empty cluster.

    After a seeded shuffle the first ``k`` items are dealt one per cluster and
    the rest are assigned uniformly at random.
    """
    X = check_descriptors(descriptors)
    n = X.shape[0]
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    if n < k:
        raise ConfigError(f"not enough items: {n} descriptors for k={k}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    labels = np.empty(n, dtype=np.intp)
    labels[order[:k]] = np.arange(k)
    labels[order[k:]] = rng.integers(0, k, size=n - k)
    p = Partition(X, labels, k, refresh_interval=refresh_interval, check=False)
    p.seed = seed
    return p


def _prepare(descriptors, k):
    X = check_descriptors(descriptors)
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    if X.shape[0] < k:
        raise ConfigError(f"not enough items: {X.shape[0]} descriptors for k={k}")
    return X


def _start(X, k, init, seed, cfg):
    if init is None:
        return init_partition(X, k, seed, cfg.refresh_interval)
    if isinstance(init, Partition):
        p = init.copy()
        p.refresh_interval = cfg.refresh_interval
    else:
        p = Partition(X, init, k, refresh_interval=cfg.refresh_interval, check=False)
    if p.k != k:
        raise ConfigError(f"initial partition has k={p.k}, expected {k}")
    if p.seed is None:
        p.seed = seed
    return p


def _run_lsc(p: Partition, cfg: LscConfig) -> Partition:
    budget = cfg.move_budget(p.n, p.k)
    if not p.trace:
        p.trace.append(objective(p))
    done = 0
    p.converged = False
    while done < budget:
        p, mv = tcls_step(p, cfg.epsilon)
        if mv is None:
            p.converged = True
            break
        done += 1
        p.trace.append(objective(p))
    else:
        p.converged = best_move(p, cfg.epsilon) is None
    p.refresh()
    return p


def _run_kmeans(p: Partition, cfg: LscConfig) -> Partition:
    budget = cfg.move_budget(p.n, p.k)
    X = p.X
    if not p.trace:
        p.trace.append(objective(p))
    done = 0
    p.converged = False
    while done < budget:
        scores = X @ p.concepts.T
        best = np.argmax(scores, axis=1)
        counts = p.counts.copy()
        labels = p.labels.copy()
        accepted = 0
        for doc in range(p.n):
            i, j = labels[doc], best[doc]
            if j == i or not scores[doc, j] - scores[doc, i] > cfg.epsilon:
                continue
            if counts[i] < 2:
                continue
            counts[i] -= 1
            counts[j] += 1
            labels[doc] = j
            accepted += 1
            if done + accepted >= budget:
                break
        if accepted == 0:
            p.converged = True
            break
        p.labels = labels
        p.refresh()
        p.n_moves += accepted
        done += accepted
        p.trace.append(objective(p))
    return p


def _best_of_restarts(run_one, seeds, workers):
    if workers > 1 and len(seeds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_one, seeds))
    else:
        results = [run_one(s) for s in seeds]
    # first run wins ties, so the result does not depend on scheduling
    best = results[0]
    for r in results[1:]:
        if objective(r) > objective(best):
            best = r
    return best


def _driver(X, k, cfg, init, stages):
    def run_one(seed):
        p = _start(X, k, init, seed, cfg)
        for stage in stages:
            p = stage(p, cfg)
        return p

    seeds = [cfg.seed] if init is not None else [cfg.seed + r for r in range(cfg.restarts)]
    return _best_of_restarts(run_one, seeds, cfg.workers)


def lsc_cluster(descriptors, k: int, cfg: Optional[LscConfig] = None, init=None) -> Partition:
    """Repeat best single moves until none gains more than ``cfg.epsilon``.

    Without ``init``, runs ``cfg.restarts`` times from seeds ``seed, seed+1,
    ...`` and keeps the highest objective. ``init`` may be a Partition or an
    assignment vector; then a single run starts from it.

    The returned partition carries ``trace`` (objective after each accepted
    move, starting with the initial value), ``n_moves``, ``converged`` and the
    ``seed`` of the winning run.
    """
    cfg = cfg or LscConfig()
    X = _prepare(descriptors, k)
    return _driver(X, k, cfg, init, [_run_lsc])


def kmeans_cluster(descriptors, k: int, cfg: Optional[LscConfig] = None, init=None) -> Partition:
    """Batch spherical k-means.

    Each iteration freezes the concept vectors, sends every vector to its most
    similar concept when that beats its current one by more than epsilon
    (skipping moves that would empty a cluster), then recomputes all sums.
    """
    cfg = cfg or LscConfig()
    X = _prepare(descriptors, k)
    return _driver(X, k, cfg, init, [_run_kmeans])


def kmeans_then_lsc(descriptors, k: int, cfg: Optional[LscConfig] = None, init=None) -> Partition:
    cfg = cfg or LscConfig()
    X = _prepare(descriptors, k)
    return _driver(X, k, cfg, init, [_run_kmeans, _run_lsc])


def cluster(descriptors, k: int, algorithm: str = "kmeans-then-lsc",
            cfg: Optional[LscConfig] = None, init=None) -> Partition:
    runners = {"lsc": lsc_cluster, "kmeans": kmeans_cluster, "kmeans-then-lsc": kmeans_then_lsc}
    if algorithm not in runners:
        raise ConfigError(f"unknown algorithm {algorithm!r}; choose from {', '.join(ALGORITHMS)}")
    return runners[algorithm](descriptors, k, cfg, init)


def brute_force_optimum(descriptors, k: int, max_assignments: int = 10**6,
                        chunk: int = 1 << 15) -> Partition:
    """Exhaustive search over all assignments with no empty cluster.

    Ties (within 1e-12) go to the lexicographically smallest assignment.
    """
    X = _prepare(descriptors, k)
    n = X.shape[0]
    total = k ** n
    if total > max_assignments:
        raise ConfigError(f"instance too large for brute force: {k}^{n} = {total} assignments")
    weights = k ** np.arange(n - 1, -1, -1)
    best_obj, best_labels = -np.inf, None
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total))
        labels = (codes[:, None] // weights) % k
        obj = np.zeros(len(codes))
        valid = np.ones(len(codes), dtype=bool)
        for c in range(k):
            mask = (labels == c).astype(np.float64)
            valid &= mask.any(axis=1)
            obj += np.linalg.norm(mask @ X, axis=1)
        obj[~valid] = -np.inf
        top = obj.max()
        if top > best_obj + 1e-12:
            idx = int(np.flatnonzero(obj >= top - 1e-12)[0])
            best_obj, best_labels = obj[idx], labels[idx]
    return Partition(X, best_labels, k, check=False)


def enumerate_moves(p: Partition):
    """All allowed (doc, target) relocations, in doc-then-target order."""
    for doc, target in itertools.product(range(p.n), range(p.k)):
        if target != p.labels[doc] and p.counts[p.labels[doc]] >= 2:
            yield doc, target


__all__ = [
    "ALGORITHMS",
    "ClusterState",
    "LscConfig",
    "MoveDelta",
    "Partition",
    "best_move",
    "brute_force_optimum",
    "check_descriptors",
    "cluster",
    "cohesion",
    "enumerate_moves",
    "incremental_delta",
    "init_partition",
    "kmeans_cluster",
    "kmeans_delta",
    "kmeans_then_lsc",
    "lsc_cluster",
    "move_gains",
    "objective",
    "tcls_step",
]

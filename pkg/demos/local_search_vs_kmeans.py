"""
Local search versus spherical k-means
=====================================

Both algorithms maximize the same objective, the sum over clusters of the
norm of the cluster's vector sum. k-means only moves a vector when it is
closer to another concept vector; local search moves whichever vector gives
the largest exact improvement. Started from k-means' answer, local search
can often improve further.
"""

import numpy as np

from vidmine import LscConfig, best_move, kmeans_cluster, lsc_cluster, objective

rng = np.random.default_rng(1)

###############################################################################
# 300 non-negative unit vectors, loosely grouped around 6 directions.
centers = np.abs(rng.normal(size=(6, 10)))
X = np.abs(centers[rng.integers(0, 6, 300)] + 0.8 * rng.normal(size=(300, 10)))
X /= np.linalg.norm(X, axis=1)[:, None]

###############################################################################
# Run k-means from a handful of seeds and continue each result with local
# search.
improved = 0
for seed in range(10):
    km = kmeans_cluster(X, 6, LscConfig(seed=seed))
    mv = best_move(km)
    ls = lsc_cluster(X, 6, init=km)
    gain = objective(ls) - objective(km)
    improved += gain > 0
    print("seed %d: k-means %.4f (%d moves), + local search %.4f (%d more moves)%s" % (
        seed, objective(km), km.n_moves, objective(ls), ls.n_moves - km.n_moves,
        "" if mv is None else ", first extra move gains %.2e" % mv.gain))
print("local search improved %d of 10 k-means results" % improved)

###############################################################################
# The objective trace of a local-search run rises strictly with every move.
run = lsc_cluster(X, 6, LscConfig(seed=0))
print("trace head:", np.round(run.trace[:5], 4), "... final", round(run.trace[-1], 4))

import json
import math

import numpy as np
import pytest

import oracles
from conftest import DATA
from vidmine import (
    ConfigError,
    InputError,
    LscConfig,
    Partition,
    best_move,
    brute_force_optimum,
    cohesion,
    incremental_delta,
    init_partition,
    kmeans_cluster,
    kmeans_delta,
    kmeans_then_lsc,
    lsc_cluster,
    objective,
    tcls_step,
)
from vidmine.errors import DegenerateInputError, EmptyClusterError
from vidmine.lsclust import cluster, enumerate_moves, move_gains

E = np.eye(4)
SQ2 = math.sqrt(2)


def worked_partition():
    # ({e1, e2}, {e1 copy})
    return Partition(np.array([E[0], E[1], E[0]]), [0, 0, 1])


# cohesion / objective


def test_cohesion_examples():
    assert cohesion(Partition(E[:1], [0]).cluster(0)) == pytest.approx(1, abs=1e-15)
    assert cohesion(Partition(np.array([E[0], E[0]]), [0, 0]).cluster(0)) == pytest.approx(2, abs=1e-15)
    assert cohesion(Partition(E[:2], [0, 0]).cluster(0)) == pytest.approx(SQ2, abs=1e-15)


def test_objective_examples():
    p = Partition(E[:3], [0, 0, 1])
    assert objective(p) == pytest.approx(SQ2 + 1, abs=1e-15)
    same = np.tile(E[1], (7, 1))
    assert objective(Partition(same, [0, 0, 0, 1, 1, 1, 1])) == pytest.approx(7, abs=1e-12)


def test_objective_forms_agree(rng):
    for _ in range(30):
        X, labels, k = oracles.random_instance(rng)
        p = Partition(X, labels, k)
        obj = objective(p)
        assert obj == pytest.approx(oracles.objective_cosine_form(X, labels, k), abs=1e-9)
        assert obj == pytest.approx(oracles.objective_scratch(X, labels, k), abs=1e-9)
        assert obj <= len(X) + 1e-9
        assert obj >= p.norms.max() - 1e-12


def test_cluster_state_consistent(rng):
    X, labels, k = oracles.random_instance(rng)
    p = Partition(X, labels, k)
    for i, st in enumerate(p.clusters()):
        assert set(st.members) == set(np.flatnonzero(labels == i))
        assert np.allclose(st.sum_vector, oracles.cluster_sum(X, labels, i), atol=1e-9)
        assert abs(np.linalg.norm(st.concept) - 1) < 1e-12


# partition validation


def test_partition_rejects_non_unit():
    with pytest.raises(InputError):
        Partition(np.array([[1.0, 1.0]]), [0])


def test_partition_rejects_empty_cluster():
    with pytest.raises(InputError, match="empty"):
        Partition(E[:3], [0, 0, 2], k=3)


def test_partition_rejects_cancelling_members():
    with pytest.raises(DegenerateInputError):
        Partition(np.array([E[0], -E[0], E[1]]), [0, 0, 1])


# deltas


def test_kmeans_delta_worked():
    assert kmeans_delta(worked_partition(), 0, 1) == pytest.approx(1 - 1 / SQ2, abs=1e-12)


def test_kmeans_delta_symmetric_concepts():
    # ({e1, e2}, {e1, e3}): e1 sees both concepts at 1/sqrt 2
    p = Partition(np.array([E[0], E[1], E[0], E[2]]), [0, 0, 1, 1])
    assert kmeans_delta(p, 0, 1) == pytest.approx(0, abs=1e-15)


def test_kmeans_delta_doc_is_own_concept():
    # singleton {e3} against concept e1
    p = Partition(np.array([E[0], E[2]]), [0, 1])
    assert kmeans_delta(p, 1, 0) == pytest.approx(-1, abs=1e-15)


def test_kmeans_delta_same_cluster():
    with pytest.raises(ValueError):
        kmeans_delta(worked_partition(), 0, 0)


def test_incremental_delta_worked():
    p = worked_partition()
    assert incremental_delta(p, 0, 1) == pytest.approx(2 - SQ2, abs=1e-12)


def test_incremental_delta_symmetric_swap():
    p = Partition(E[:3], [0, 0, 1])
    assert incremental_delta(p, 1, 1) == pytest.approx(0, abs=1e-12)


def test_incremental_delta_would_empty():
    with pytest.raises(EmptyClusterError):
        incremental_delta(worked_partition(), 2, 0)


def test_incremental_delta_vs_scratch(rng):
    for _ in range(50):
        X, labels, k = oracles.random_instance(rng)
        p = Partition(X, labels, k)
        for doc, target in enumerate_moves(p):
            exact = oracles.delta_scratch(X, labels, k, doc, target)
            assert abs(incremental_delta(p, doc, target) - exact) <= 1e-9


def test_move_gain_matrix_matches_scalar(rng):
    X, labels, k = oracles.random_instance(rng, n_max=12)
    p = Partition(X, labels, k)
    G = move_gains(p)
    for doc in range(p.n):
        for t in range(k):
            if t == labels[doc] or p.counts[labels[doc]] < 2:
                assert G[doc, t] == -np.inf
            else:
                assert G[doc, t] == pytest.approx(incremental_delta(p, doc, t), abs=1e-14)


def test_decomposition_and_dominance(rng):
    for _ in range(50):
        X, labels, k = oracles.random_instance(rng)
        p = Partition(X, labels, k)
        for doc, target in enumerate_moves(p):
            src, tgt, km = oracles.decomposition(X, labels, doc, target)
            inc = incremental_delta(p, doc, target)
            assert abs(inc - (src + tgt + km)) <= 1e-9
            assert src >= -1e-12 and tgt >= -1e-12
            assert km == pytest.approx(kmeans_delta(p, doc, target), abs=1e-12)
            assert inc >= kmeans_delta(p, doc, target) - 1e-12


# best_move / tcls_step


def test_best_move_worked():
    mv = best_move(worked_partition())
    assert (mv.doc, mv.source, mv.target) == (0, 0, 1)
    assert mv.gain == pytest.approx(2 - SQ2, abs=1e-12)


def test_best_move_worked_is_only_improving_move():
    p = worked_partition()
    X = p.X
    improving = [(d, t) for d, t in enumerate_moves(p)
                 if oracles.delta_scratch(X, p.labels, 2, d, t) > 1e-12]
    assert improving == [(0, 1)]


def test_best_move_parallel_none():
    X = np.tile(E[2], (6, 1))
    assert best_move(Partition(X, [0, 0, 0, 1, 1, 1])) is None


def test_best_move_vs_exhaustive(rng):
    for _ in range(40):
        X, labels, k = oracles.random_instance(rng)
        p = Partition(X, labels, k)
        gains = {(d, t): oracles.delta_scratch(X, labels, k, d, t) for d, t in enumerate_moves(p)}
        mv = best_move(p)
        top = max(gains.values(), default=-np.inf)
        if top > 1e-9:
            assert mv is not None
            assert mv.gain == pytest.approx(top, abs=1e-9)
            assert gains[(mv.doc, mv.target)] == pytest.approx(top, abs=1e-9)
        elif top < 1e-15:
            assert mv is None


def test_best_move_tie_break():
    # ({e1, e2}, {e1, e2}): every move has the same gain 1 + sqrt 5 - 2 sqrt 2
    p = Partition(np.array([E[0], E[1], E[0], E[1]]), [0, 0, 1, 1])
    G = move_gains(p)
    assert np.all(G[np.isfinite(G)] == G[0, 1])
    mv = best_move(p)
    assert (mv.doc, mv.target) == (0, 1)
    assert mv.gain == pytest.approx(1 + math.sqrt(5) - 2 * SQ2, abs=1e-12)


def test_tcls_step_worked():
    p = worked_partition()
    before = objective(p)
    p, mv = tcls_step(p)
    assert before == pytest.approx(1 + SQ2, abs=1e-12)
    assert objective(p) == pytest.approx(3, abs=1e-12)
    assert p.labels.tolist() == [1, 0, 1]
    assert mv.gain == pytest.approx(objective(p) - before, abs=1e-9)


def test_tcls_step_fixed_point():
    p = Partition(np.array([E[0], E[0], E[1]]), [0, 0, 1])
    before = p.labels.tobytes()
    p2, mv = tcls_step(p)
    assert mv is None and p2.labels.tobytes() == before


def test_tcls_step_gain_matches_recomputation(rng):
    for _ in range(40):
        X, labels, k = oracles.random_instance(rng)
        p = Partition(X, labels, k)
        before = oracles.objective_scratch(X, p.labels, k)
        p, mv = tcls_step(p)
        if mv is not None:
            after = oracles.objective_scratch(X, p.labels, k)
            assert after - before == pytest.approx(mv.gain, abs=1e-9)
            assert np.allclose(p.sums, [oracles.cluster_sum(X, p.labels, c) for c in range(k)], atol=1e-9)


# init


def test_init_partition():
    X = oracles.random_unit(np.random.default_rng(0), 100, 3)
    assert sorted(init_partition(X[:3], 3, seed=5).labels.tolist()) == [0, 1, 2]
    a = init_partition(X, 4, seed=9).labels
    b = init_partition(X, 4, seed=9).labels
    assert np.array_equal(a, b)
    for seed in range(20):
        assert np.all(np.bincount(init_partition(X, 4, seed).labels, minlength=4) > 0)


def test_init_too_few():
    with pytest.raises(ConfigError, match="not enough"):
        init_partition(E[:2], 3)


# drivers


def test_lsc_k1():
    X = oracles.random_unit(np.random.default_rng(1), 8, 3)
    p = lsc_cluster(X, 1)
    assert p.labels.tolist() == [0] * 8 and p.n_moves == 0


def test_lsc_n_equals_k():
    X = oracles.random_unit(np.random.default_rng(2), 4, 3)
    init = init_partition(X, 4, seed=0)
    p = lsc_cluster(X, 4, LscConfig(seed=0))
    assert np.array_equal(p.labels, init.labels) and p.n_moves == 0


def test_lsc_errors():
    with pytest.raises(ConfigError):
        lsc_cluster(E[:2], 3)
    with pytest.raises(InputError):
        lsc_cluster(np.array([[2.0, 0.0], [0.0, 1.0]]), 1)


def test_lsc_deterministic_and_monotone(rng):
    X = oracles.random_unit(rng, 40, 5)
    a = lsc_cluster(X, 3, LscConfig(seed=4))
    b = lsc_cluster(X, 3, LscConfig(seed=4))
    assert np.array_equal(a.labels, b.labels) and a.trace == b.trace
    assert all(y - x > 1e-12 for x, y in zip(a.trace, a.trace[1:]))
    assert a.converged
    assert np.allclose(a.sums, [oracles.cluster_sum(X, a.labels, c) for c in range(3)], atol=1e-7)


def test_lsc_refresh_interval_does_not_change_result(rng):
    X = oracles.random_unit(rng, 40, 5)
    a = lsc_cluster(X, 4, LscConfig(seed=1, refresh_interval=1))
    b = lsc_cluster(X, 4, LscConfig(seed=1, refresh_interval=10_000))
    assert np.array_equal(a.labels, b.labels)
    assert objective(a) == pytest.approx(objective(b), abs=1e-9)


def test_lsc_max_moves_budget(rng):
    X = oracles.random_unit(rng, 40, 5)
    p = lsc_cluster(X, 4, LscConfig(seed=0, max_moves=3))
    assert p.n_moves == 3 and len(p.trace) == 4


def test_restarts_take_best(rng):
    X = oracles.random_unit(rng, 30, 4)
    runs = [objective(lsc_cluster(X, 3, LscConfig(seed=7 + r))) for r in range(5)]
    best = lsc_cluster(X, 3, LscConfig(seed=7, restarts=5))
    assert objective(best) == max(runs)
    assert best.seed == 7 + runs.index(max(runs))
    par = lsc_cluster(X, 3, LscConfig(seed=7, restarts=5, workers=3))
    assert np.array_equal(par.labels, best.labels)


def test_lsc_small_instances_hit_optimum():
    rng = np.random.default_rng(77)
    hits = 0
    for _ in range(30):
        n = int(rng.integers(3, 9))
        X = oracles.random_unit(rng, n, int(rng.integers(2, 5)))
        got = objective(lsc_cluster(X, 2, LscConfig(restarts=20)))
        hits += abs(got - oracles.brute_force(X, 2)) <= 1e-9
    assert hits >= 28


def test_kmeans_separated_groups():
    X = np.array([E[0]] * 3 + [E[1]] * 4)
    p = kmeans_cluster(X, 2, init=[0, 1, 0, 0, 1, 1, 0])
    assert len(set(p.labels[:3])) == 1 and len(set(p.labels[3:])) == 1
    assert objective(p) == pytest.approx(7, abs=1e-12)


def test_kmeans_identical_converges_immediately():
    X = np.tile(E[3], (5, 1))
    p = kmeans_cluster(X, 2, LscConfig(seed=3))
    assert p.n_moves == 0 and p.converged


def test_kmeans_monotone(rng):
    X = oracles.random_unit(rng, 60, 4)
    p = kmeans_cluster(X, 5, LscConfig(seed=2))
    assert all(y > x for x, y in zip(p.trace, p.trace[1:]))
    assert p.converged


def test_chain_never_worse(rng):
    for seed in range(10):
        X = oracles.random_unit(rng, 30, 3)
        km = kmeans_cluster(X, 3, LscConfig(seed=seed))
        ls = lsc_cluster(X, 3, init=km)
        assert objective(ls) >= objective(km)
        assert objective(kmeans_then_lsc(X, 3, LscConfig(seed=seed))) == pytest.approx(objective(ls), abs=1e-12)


def test_cluster_dispatch():
    with pytest.raises(ConfigError):
        cluster(E[:2], 1, "dbscan")


def test_kmeans_stall_fixture():
    fx = json.loads((DATA / "kmeans_stall.json").read_text())
    X = np.array(fx["descriptors"])
    km = kmeans_cluster(X, fx["k"], init=fx["init"])
    assert km.converged
    assert km.labels.tolist() == fx["kmeans_assignment"]
    mv = best_move(km)
    assert mv is not None and mv.gain > 1e-9
    ls = lsc_cluster(X, fx["k"], init=km)
    assert objective(ls) > objective(km) + 1e-9


def test_stall_search_reproduces():
    """The randomized search that produced the fixture still finds a stalled k-means run."""
    for seed in range(200):
        r = np.random.default_rng(seed)
        X = np.abs(r.normal(size=(int(r.integers(4, 9)), int(r.integers(2, 4)))))
        X /= np.linalg.norm(X, axis=1)[:, None]
        km = kmeans_cluster(X, 2, init=init_partition(X, 2, seed))
        mv = best_move(km)
        if km.converged and mv is not None and mv.gain > 1e-9:
            return
    pytest.fail("no stalled k-means instance found")


# brute force


def test_brute_force_examples():
    assert objective(brute_force_optimum(E[:2], 2)) == pytest.approx(2)
    assert objective(brute_force_optimum(np.array([E[0], E[0]]), 1)) == pytest.approx(2)
    p = brute_force_optimum(np.array([E[0], E[1], E[0], E[1]]), 2)
    assert objective(p) == pytest.approx(4)
    assert p.labels.tolist() == [0, 1, 0, 1]


def test_brute_force_matches_itertools(rng):
    for _ in range(10):
        X = oracles.random_unit(rng, int(rng.integers(2, 7)), 3)
        k = int(rng.integers(1, 4))
        if k > len(X):
            continue
        assert objective(brute_force_optimum(X, k)) == pytest.approx(oracles.brute_force(X, k), abs=1e-9)


def test_brute_force_guard():
    X = oracles.random_unit(np.random.default_rng(0), 21, 2)
    with pytest.raises(ConfigError, match="too large"):
        brute_force_optimum(X, 2)

"""Attack algorithms: interior-point identification, per-cluster optimal
flip tables by exhaustive search, the budget dynamic program, the full
partition-based attack (single set and train/test), and a greedy baseline."""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .config import (
    DEFAULT_CLUSTER_CAP,
    DEFAULT_SUBSET_LIMIT,
    PartitionStats,
    RunConfig,
    TrialStats,
)
from .core import (
    LabeledDataset,
    NeighborIndex,
    build_neighbor_index,
    evaluate_corruption,
    flip_labels,
    predict_all,
)
from .errors import ClusterTooLarge
from .partition import (
    MultiScaleConfig,
    PartitionSample,
    assign_external,
    euclidean_poison_partition,
)


class BudgetEntry(NamedTuple):
    flips: tuple[int, ...]
    corruption: int


@dataclass(frozen=True)
class ClusterPoisonTable:
    """Optimal flip sets for one cluster at every budget 0..cap.

    best[i] is the first maximizer, in subset enumeration order, over all
    flip subsets of the members with size at most i; corruption counts only
    the interior evaluation points. Values are non-decreasing in i.
    """

    key: tuple | None
    member_ids: tuple[int, ...]
    interior_ids: tuple[int, ...]
    best: tuple[BudgetEntry, ...]


@dataclass(frozen=True)
class DPTable:
    """Budget-allocation table: values[i][j] is the best total interior
    corruption using at most j flips on the first i clusters."""

    values: np.ndarray
    choice: np.ndarray  # budget given to cluster i at state (i, j)


@dataclass(frozen=True)
class PoisonPlan:
    """A flip set together with its certificates and provenance.

    certified_interior_corruption is the DP optimum over interior points,
    a lower bound on evaluated_corruption because an interior point's
    neighbor list never leaves its own cluster. Wall-clock timing is
    provenance, not a result, so it is excluded from equality.
    """

    flips: tuple[int, ...]
    certified_interior_corruption: int
    evaluated_corruption: int
    discarded_count: int
    config: RunConfig
    partition_stats: PartitionStats
    timing_ms: float | None = field(default=None, compare=False)


def multiscale_config_for(config: RunConfig, d: int, seed: int | None = None) -> MultiScaleConfig:
    """The partition constants implied by a run configuration."""
    s = config.seed if seed is None else seed
    if config.mode == "guarantee":
        return MultiScaleConfig.guarantee(config.k, config.eps, d, seed=s)
    if config.mode == "practical":
        return MultiScaleConfig.practical(
            config.k, config.eps, d, C=config.c_override, B=config.b_override, seed=s
        )
    raise ValueError(f"mode {config.mode!r} has no partition constants")


def interior_points(
    sample: PartitionSample,
    index: NeighborIndex,
    eval_ids=None,
    eval_keys=None,
) -> tuple[dict, np.ndarray]:
    """Split eval points into per-cluster interior sets and the discard set.

    A point is interior when its own cluster key matches the key of every
    one of its k nearest neighbors; everything else lands in the discard
    set X' and is written off by the approximation guarantee.
    """
    if eval_ids is None:
        eval_ids = np.arange(index.n_queries)
    ids = np.asarray(eval_ids, dtype=np.int64)
    if eval_keys is None:
        if not index.self_indexed:
            raise ValueError("eval_keys required when queries are not the partitioned points")
        eval_keys = [sample.keys[e] for e in ids]
    interior: dict = {}
    discarded: list[int] = []
    keys = sample.keys
    neighbors = index.neighbors
    for pos in range(ids.shape[0]):
        e = int(ids[pos])
        ke = eval_keys[pos]
        if all(keys[nb] == ke for nb in neighbors[e]):
            interior.setdefault(ke, []).append(e)
        else:
            discarded.append(e)
    return (
        {key: np.asarray(v, dtype=np.int64) for key, v in interior.items()},
        np.asarray(discarded, dtype=np.int64),
    )


def _subset_count(n: int, cap: int) -> int:
    return sum(math.comb(n, i) for i in range(cap + 1))


def solve_cluster(
    members,
    interior_ids,
    index: NeighborIndex,
    labels,
    m: int,
    *,
    eval_labels=None,
    key=None,
    cluster_cap: int = DEFAULT_CLUSTER_CAP,
    subset_limit: int = DEFAULT_SUBSET_LIMIT,
) -> ClusterPoisonTable:
    """Exact per-budget optimal flip sets for one cluster.

    Enumerates every subset of the members with size at most min(m, |C|)
    in lexicographic order, keeping per-budget first maximizers. Corruption
    is maintained incrementally: each interior point caches its count of
    label-2 neighbors, and toggling one member's flip touches only the
    interior points adjacent to it. This is exactly equivalent to
    re-evaluating each subset from scratch.
    """
    members = tuple(sorted(int(c) for c in members))
    interior = tuple(sorted(int(e) for e in interior_ids))
    labels = np.asarray(labels, dtype=np.int64)
    n_members = len(members)
    cap = min(m, n_members)
    if n_members > cluster_cap:
        raise ClusterTooLarge(n_members, cluster_cap)
    n_subsets = _subset_count(n_members, cap)
    if n_subsets > subset_limit:
        raise ClusterTooLarge(n_members, subset_limit, subsets=n_subsets)

    if eval_labels is None:
        eval_labels = labels
    else:
        eval_labels = np.asarray(eval_labels, dtype=np.int64)

    if not interior:
        entry = BudgetEntry((), 0)
        return ClusterPoisonTable(key, members, interior, tuple([entry] * (cap + 1)))

    k = index.k
    member_slot = {c: s for s, c in enumerate(members)}
    adj: list[list[int]] = [[] for _ in range(n_members)]
    cnt2 = []
    truth2 = []
    for pos, e in enumerate(interior):
        nbs = index.neighbors[e]
        c2 = 0
        for nb in nbs:
            nb = int(nb)
            slot = member_slot.get(nb)
            if slot is None:
                raise ValueError(f"interior point {e} has neighbor {nb} outside the cluster")
            adj[slot].append(pos)
            if labels[nb] == 2:
                c2 += 1
        cnt2.append(c2)
        truth2.append(1 if eval_labels[e] == 2 else 0)

    def corrupted(pos: int) -> int:
        pred2 = 1 if 2 * cnt2[pos] > k else 0
        return 1 if pred2 != truth2[pos] else 0

    total = sum(corrupted(pos) for pos in range(len(interior)))

    best_val = [-1] * (cap + 1)
    best_flips: list[tuple[int, ...]] = [()] * (cap + 1)
    current: list[int] = []

    def visit(size: int, value: int) -> None:
        for i in range(size, cap + 1):
            if value > best_val[i]:
                best_val[i] = value
                best_flips[i] = tuple(current)

    def toggle(slot: int, direction: int) -> int:
        # direction +1 when the member's label flips 1 -> 2, else -1
        delta = 0
        for pos in adj[slot]:
            before = corrupted(pos)
            cnt2[pos] += direction
            delta += corrupted(pos) - before
        return delta

    def recurse(start: int, size: int, value: int) -> None:
        visit(size, value)
        if size == cap:
            return
        for slot in range(start, n_members):
            direction = 1 if labels[members[slot]] == 1 else -1
            current.append(members[slot])
            recurse(slot + 1, size + 1, value + toggle(slot, direction))
            current.pop()
            toggle(slot, -direction)

    recurse(0, 0, total)
    best = tuple(BudgetEntry(best_flips[i], best_val[i]) for i in range(cap + 1))
    return ClusterPoisonTable(key, members, interior, best)


def combine_dp(tables, m: int) -> tuple[DPTable, tuple[int, ...]]:
    """Allocate the flip budget across clusters by dynamic programming.

    values[i][j] = max over a in 0..j of values[i-1][j-a] + best_i(a), with
    best_i the at-most-a corruption of cluster i. Ties prefer the smaller
    allocation. Back-pointers reconstruct a flip set of total size <= m.
    """
    tables = list(tables)
    t_count = len(tables)
    values = np.zeros((t_count + 1, m + 1), dtype=np.int64)
    choice = np.zeros((t_count + 1, m + 1), dtype=np.int64)
    for i in range(1, t_count + 1):
        rows = [entry.corruption for entry in tables[i - 1].best]
        cap = len(rows) - 1
        for j in range(m + 1):
            best = -1
            arg = 0
            for a in range(min(j, cap) + 1):
                v = values[i - 1][j - a] + rows[a]
                if v > best:
                    best = v
                    arg = a
            values[i][j] = best
            choice[i][j] = arg
    flips: list[int] = []
    j = m
    for i in range(t_count, 0, -1):
        a = int(choice[i][j])
        flips.extend(tables[i - 1].best[a].flips)
        j -= a
    return DPTable(values=values, choice=choice), tuple(sorted(flips))


def _plan_from_sample(
    index: NeighborIndex,
    sample: PartitionSample,
    ref: LabeledDataset,
    run: RunConfig,
    *,
    eval_ids,
    eval_keys,
    eval_labels,
) -> PoisonPlan:
    started = time.perf_counter()
    interior_map, discarded = interior_points(sample, index, eval_ids, eval_keys)

    ordered_keys = sorted(sample.clusters)

    def solve(key):
        return solve_cluster(
            sample.clusters[key],
            interior_map.get(key, ()),
            index,
            ref.labels,
            run.m,
            eval_labels=eval_labels,
            key=key,
            cluster_cap=run.cluster_cap,
            subset_limit=run.subset_limit,
        )

    if run.workers > 1 and len(ordered_keys) > 1:
        with ThreadPoolExecutor(max_workers=run.workers) as pool:
            tables = list(pool.map(solve, ordered_keys))
    else:
        tables = [solve(key) for key in ordered_keys]

    dp, flips = combine_dp(tables, run.m)
    certified = int(dp.values[-1][run.m])
    evaluated = evaluate_corruption(index, ref, flips, eval_ids, eval_labels=eval_labels)
    if evaluated < certified:
        raise AssertionError("interior certificate exceeded the global evaluation")

    stats = PartitionStats(
        cluster_count=sample.cluster_count,
        max_cluster_size=sample.max_cluster_size,
        discarded_count=int(discarded.shape[0]),
    )
    plan = PoisonPlan(
        flips=flips,
        certified_interior_corruption=certified,
        evaluated_corruption=evaluated,
        discarded_count=int(discarded.shape[0]),
        config=run,
        partition_stats=stats,
        timing_ms=(time.perf_counter() - started) * 1000.0,
    )
    trial = TrialStats(
        trial=0,
        seed=run.seed,
        evaluated=plan.evaluated_corruption,
        certified=plan.certified_interior_corruption,
        discarded=plan.discarded_count,
        cluster_count=stats.cluster_count,
        max_cluster_size=stats.max_cluster_size,
    )
    return replace(plan, partition_stats=replace(stats, per_trial=(trial,)))


def knn_flip(
    dataset: LabeledDataset,
    k: int,
    m: int,
    eps: float,
    mode: str = "guarantee",
    seed: int = 0,
    *,
    c_override: float | None = None,
    b_override: float | None = None,
    self_mode: str = "exclude_self",
    cluster_cap: int = DEFAULT_CLUSTER_CAP,
    subset_limit: int = DEFAULT_SUBSET_LIMIT,
    workers: int = 1,
) -> PoisonPlan:
    """One draw of the partition-based attack on a single labeled set.

    Samples the multi-scale partition, solves each cluster exactly over its
    interior points, combines the tables with the budget DP, and re-scores
    the reconstructed flip set globally.
    """
    run = RunConfig(
        k=k,
        m=m,
        eps=eps,
        mode=mode,
        c_override=c_override,
        b_override=b_override,
        seed=seed,
        self_mode=self_mode,
        cluster_cap=cluster_cap,
        subset_limit=subset_limit,
        workers=workers,
        trials=1,
    )
    run.validate()
    if m > dataset.n:
        raise ValueError(f"budget m={m} exceeds the {dataset.n} available points")
    index = build_neighbor_index(dataset, None, k, self_mode)
    msconfig = multiscale_config_for(run, dataset.d)
    sample = euclidean_poison_partition(index, msconfig)
    return _plan_from_sample(
        index,
        sample,
        dataset,
        run,
        eval_ids=np.arange(dataset.n),
        eval_keys=None,
        eval_labels=None,
    )


def knn_flip_traintest(
    train: LabeledDataset,
    test: LabeledDataset,
    k: int,
    m: int,
    eps: float,
    mode: str = "guarantee",
    seed: int = 0,
    *,
    c_override: float | None = None,
    b_override: float | None = None,
    cluster_cap: int = DEFAULT_CLUSTER_CAP,
    subset_limit: int = DEFAULT_SUBSET_LIMIT,
    workers: int = 1,
) -> PoisonPlan:
    """Partition-based attack flipping train labels to corrupt test points.

    The partition covers the training set only; test points are placed into
    it through assign_external and count toward corruption only when all k
    of their training neighbors share their cluster.
    """
    if train.d != test.d:
        raise ValueError("train and test must share a dimension")
    run = RunConfig(
        k=k,
        m=m,
        eps=eps,
        mode=mode,
        c_override=c_override,
        b_override=b_override,
        seed=seed,
        self_mode="exclude_self",
        cluster_cap=cluster_cap,
        subset_limit=subset_limit,
        workers=workers,
        trials=1,
    )
    run.validate()
    if m > train.n:
        raise ValueError(f"budget m={m} exceeds the {train.n} training points")
    train_index = build_neighbor_index(train, None, k, "exclude_self")
    test_index = build_neighbor_index(train, test.points, k, "include_self")
    msconfig = multiscale_config_for(run, train.d)
    sample = euclidean_poison_partition(train_index, msconfig)
    test_keys = [
        assign_external(sample, msconfig, train_index, test.points[j]) for j in range(test.n)
    ]
    return _plan_from_sample(
        test_index,
        sample,
        train,
        run,
        eval_ids=np.arange(test.n),
        eval_keys=test_keys,
        eval_labels=test.labels,
    )


def greedy_baseline(
    dataset: LabeledDataset,
    k: int,
    m: int,
    *,
    test: LabeledDataset | None = None,
    self_mode: str = "exclude_self",
) -> PoisonPlan:
    """Greedy comparison baseline: m rounds, each flipping the remaining
    point whose flip maximizes the evaluated corruption (ties to the lowest
    index). No optimality guarantee."""
    if m > dataset.n:
        raise ValueError(f"budget m={m} exceeds the {dataset.n} available points")
    if test is None:
        index = build_neighbor_index(dataset, None, k, self_mode)
        eval_labels = None
    else:
        if dataset.d != test.d:
            raise ValueError("train and test must share a dimension")
        index = build_neighbor_index(dataset, test.points, k, "include_self")
        eval_labels = test.labels

    flips: list[int] = []
    labels = np.array(dataset.labels, copy=True)
    truth = dataset.labels if eval_labels is None else np.asarray(eval_labels, dtype=np.int64)
    for _ in range(min(m, dataset.n)):
        best_val = -1
        best_c = -1
        for c in range(dataset.n):
            if c in flips:
                continue
            labels[c] = 3 - labels[c]
            val = int(np.count_nonzero(predict_all(index, labels) != truth))
            labels[c] = 3 - labels[c]
            if val > best_val:
                best_val = val
                best_c = c
        flips.append(best_c)
        labels[best_c] = 3 - labels[best_c]

    flips_t = tuple(sorted(flips))
    evaluated = int(np.count_nonzero(predict_all(index, flip_labels(dataset.labels, flips_t)) != truth))
    run = RunConfig(k=k, m=m, eps=0.0, mode="greedy", self_mode=self_mode)
    return PoisonPlan(
        flips=flips_t,
        certified_interior_corruption=evaluated,
        evaluated_corruption=evaluated,
        discarded_count=0,
        config=run,
        partition_stats=PartitionStats(0, 0, 0),
        timing_ms=None,
    )

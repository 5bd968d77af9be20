"""Exhaustive reference solvers for cross-checking the attack.

These trade speed for obvious correctness and never sit on the hot path:
no pruning, no incremental bookkeeping, plain re-evaluation everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    LabeledDataset,
    NeighborIndex,
    build_neighbor_index,
    evaluate_corruption,
    flip_labels,
    predict,
)
from .errors import InstanceTooLarge
from .poison import BudgetEntry, ClusterPoisonTable

DEFAULT_ORACLE_LIMIT = 10_000_000


@dataclass(frozen=True)
class OracleResult:
    opt_value: int
    witness_flips: tuple[int, ...]
    enumerated_count: int


def _enumerate_best(n: int, m: int, corruption_of) -> tuple[int, tuple[int, ...], int]:
    """Max corruption over all flip subsets of size <= m.

    Subsets are visited in lexicographic order of their index tuples and
    the first maximizer wins, so the witness is deterministic.
    """
    best_val = -1
    best_wit: tuple[int, ...] = ()
    count = 0
    current: list[int] = []

    def recurse(start: int) -> None:
        nonlocal best_val, best_wit, count
        count += 1
        val = corruption_of(tuple(current))
        if val > best_val:
            best_val = val
            best_wit = tuple(current)
        if len(current) == m:
            return
        for i in range(start, n):
            current.append(i)
            recurse(i + 1)
            current.pop()

    recurse(0)
    return best_val, best_wit, count


def _check_limit(n: int, m: int, limit: int) -> None:
    total = sum(math.comb(n, i) for i in range(min(m, n) + 1))
    if total > limit:
        raise InstanceTooLarge(total, limit)


def opt_exact(
    dataset: LabeledDataset,
    k: int,
    m: int,
    *,
    self_mode: str = "exclude_self",
    limit: int = DEFAULT_ORACLE_LIMIT,
) -> OracleResult:
    """Exact maximum corruption of any flip set of size <= m, by full
    enumeration."""
    _check_limit(dataset.n, m, limit)
    index = build_neighbor_index(dataset, None, k, self_mode)
    budget = min(m, dataset.n)

    def corruption_of(flips):
        return evaluate_corruption(index, dataset, flips)

    val, wit, count = _enumerate_best(dataset.n, budget, corruption_of)
    return OracleResult(opt_value=val, witness_flips=wit, enumerated_count=count)


def opt_exact_traintest(
    train: LabeledDataset,
    test: LabeledDataset,
    k: int,
    m: int,
    *,
    limit: int = DEFAULT_ORACLE_LIMIT,
) -> OracleResult:
    """Exact maximum test corruption of any train flip set of size <= m."""
    if train.d != test.d:
        raise ValueError("train and test must share a dimension")
    _check_limit(train.n, m, limit)
    index = build_neighbor_index(train, test.points, k, "include_self")
    budget = min(m, train.n)

    def corruption_of(flips):
        return evaluate_corruption(index, train, flips, eval_labels=test.labels)

    val, wit, count = _enumerate_best(train.n, budget, corruption_of)
    return OracleResult(opt_value=val, witness_flips=wit, enumerated_count=count)


def solve_cluster_reference(
    members,
    interior_ids,
    index: NeighborIndex,
    labels,
    m: int,
    *,
    eval_labels=None,
    key=None,
) -> ClusterPoisonTable:
    """Naive twin of poison.solve_cluster: identical enumeration order and
    tie handling, but every subset is re-scored from scratch."""
    members = tuple(sorted(int(c) for c in members))
    interior = tuple(sorted(int(e) for e in interior_ids))
    labels = np.asarray(labels, dtype=np.int64)
    if eval_labels is None:
        eval_labels = labels
    else:
        eval_labels = np.asarray(eval_labels, dtype=np.int64)
    cap = min(m, len(members))

    def corruption_of(flips) -> int:
        flipped = flip_labels(labels, flips)
        return sum(
            1 for e in interior if predict(index, flipped, e) != int(eval_labels[e])
        )

    best_val = [-1] * (cap + 1)
    best_flips: list[tuple[int, ...]] = [()] * (cap + 1)
    current: list[int] = []

    def recurse(start: int) -> None:
        val = corruption_of(tuple(current))
        for i in range(len(current), cap + 1):
            if val > best_val[i]:
                best_val[i] = val
                best_flips[i] = tuple(current)
        if len(current) == cap:
            return
        for slot in range(start, len(members)):
            current.append(members[slot])
            recurse(slot + 1)
            current.pop()

    recurse(0)
    best = tuple(BudgetEntry(best_flips[i], best_val[i]) for i in range(cap + 1))
    return ClusterPoisonTable(key, members, interior, best)

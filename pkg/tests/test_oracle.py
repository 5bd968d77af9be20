import numpy as np
import pytest

from knnpoison import (
    InstanceTooLarge,
    LabeledDataset,
    build_neighbor_index,
    evaluate_corruption,
    opt_exact,
    opt_exact_traintest,
    solve_cluster,
    solve_cluster_reference,
)


@pytest.fixture
def d1():
    return LabeledDataset(np.array([[0.0], [1.0], [3.0]]), np.array([1, 1, 2]))


class TestOptExact:
    def test_zero_budget_is_baseline(self, d1):
        result = opt_exact(d1, 1, 0)
        assert result.opt_value == 1
        assert result.witness_flips == ()
        assert result.enumerated_count == 1

    def test_two_symmetric_points(self):
        ds = LabeledDataset(np.array([[0.0], [1.0]]), np.array([1, 1]))
        result = opt_exact(ds, 1, 1)
        assert result.opt_value == 1

    def test_d1(self, d1):
        result = opt_exact(d1, 1, 1)
        assert result.opt_value == 2
        assert result.witness_flips == (0,)
        assert result.enumerated_count == 4

    def test_monotone_in_budget(self):
        rng = np.random.default_rng(2)
        ds = LabeledDataset(rng.uniform(size=(9, 2)), rng.integers(1, 3, size=9))
        vals = [opt_exact(ds, 3, m).opt_value for m in range(4)]
        assert vals == sorted(vals)

    def test_witness_reproduces_value(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            n = int(rng.integers(5, 11))
            ds = LabeledDataset(rng.uniform(size=(n, 2)), rng.integers(1, 3, size=n))
            result = opt_exact(ds, 1, 2)
            idx = build_neighbor_index(ds, None, 1)
            assert evaluate_corruption(idx, ds, result.witness_flips) == result.opt_value

    def test_witness_is_lexicographically_first(self):
        # symmetric pair: both {0} and {1} achieve 1, lex order picks (0,)
        ds = LabeledDataset(np.array([[0.0], [1.0]]), np.array([1, 1]))
        assert opt_exact(ds, 1, 1).witness_flips == (0,)

    def test_instance_too_large(self, d1):
        with pytest.raises(InstanceTooLarge):
            opt_exact(d1, 1, 1, limit=2)


class TestOptExactTrainTest:
    def test_empty_test(self):
        train = LabeledDataset(np.array([[0.0], [1.0]]), np.array([1, 1]))
        test = LabeledDataset(np.empty((0, 1)), np.empty(0, dtype=int))
        assert opt_exact_traintest(train, test, 1, 1).opt_value == 0

    def test_optimum_may_flip_nothing(self):
        train = LabeledDataset(np.array([[0.0], [1.0]]), np.array([1, 1]))
        test = LabeledDataset(np.array([[0.4]]), np.array([2]))
        result = opt_exact_traintest(train, test, 1, 1)
        assert result.opt_value == 1
        assert result.witness_flips == ()
        assert result.enumerated_count == 3

    def test_monotone_in_budget(self):
        rng = np.random.default_rng(5)
        train = LabeledDataset(rng.uniform(size=(8, 2)), rng.integers(1, 3, size=8))
        test = LabeledDataset(rng.uniform(size=(5, 2)), rng.integers(1, 3, size=5))
        vals = [opt_exact_traintest(train, test, 3, m).opt_value for m in range(4)]
        assert vals == sorted(vals)


class TestClusterReferenceSolver:
    def test_identical_to_incremental_solver(self):
        rng = np.random.default_rng(31)
        for trial in range(25):
            n = int(rng.integers(3, 11))
            d = int(rng.integers(1, 3))
            ds = LabeledDataset(rng.uniform(size=(n, d)), rng.integers(1, 3, size=n))
            k = 1 if n < 5 else int(rng.choice([1, 3]))
            m = int(rng.integers(0, 4))
            idx = build_neighbor_index(ds, None, k)
            members = range(n)
            interior = range(n)
            fast = solve_cluster(members, interior, idx, ds.labels, m)
            slow = solve_cluster_reference(members, interior, idx, ds.labels, m)
            assert fast.best == slow.best

    def test_identical_on_traintest_clusters(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            n, q = 7, 4
            train = LabeledDataset(rng.uniform(size=(n, 2)), rng.integers(1, 3, size=n))
            test = LabeledDataset(rng.uniform(size=(q, 2)), rng.integers(1, 3, size=q))
            idx = build_neighbor_index(train, test.points, 3)
            fast = solve_cluster(range(n), range(q), idx, train.labels, 2,
                                 eval_labels=test.labels)
            slow = solve_cluster_reference(range(n), range(q), idx, train.labels, 2,
                                           eval_labels=test.labels)
            assert fast.best == slow.best

"""Poison training labels to corrupt a held-out test set, then round-trip
the resulting plan through its JSON file the way the CLI does.

Run:  python demos/04_train_test_attack.py
"""

import tempfile
from pathlib import Path

import numpy as np

from knnpoison import (
    LabeledDataset,
    knn_flip_traintest,
    opt_exact_traintest,
    read_plan,
    write_dataset,
    write_plan,
)

rng = np.random.default_rng(23)
train = LabeledDataset(rng.uniform(size=(10, 2)), rng.integers(1, 3, size=10))
test = LabeledDataset(rng.uniform(size=(6, 2)), rng.integers(1, 3, size=6))

oracle = opt_exact_traintest(train, test, k=3, m=2)
print(f"exact optimum: {oracle.opt_value} corrupted test points via flips {list(oracle.witness_flips)}")

best = None
for seed in range(20):
    plan = knn_flip_traintest(train, test, k=3, m=2, eps=1.0, seed=seed)
    assert plan.evaluated_corruption <= oracle.opt_value
    if best is None or plan.evaluated_corruption > best.evaluated_corruption:
        best = plan
print(f"best of 20 seeds: corruption {best.evaluated_corruption} via flips {list(best.flips)}, "
      f"{best.discarded_count} test points discarded")

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    write_dataset(train, tmp / "train.csv")
    write_dataset(test, tmp / "test.csv")
    write_plan(best, tmp / "plan.json")
    again = read_plan(tmp / "plan.json")
    assert again == best
    print(f"plan round-tripped losslessly through {tmp / 'plan.json'}")
    print("equivalent CLI run:")
    print("  knnpoison attack-traintest --train train.csv --test test.csv "
          "--k 3 --m 2 --eps 1 --seed 0 --trials 20 --out plan.json")

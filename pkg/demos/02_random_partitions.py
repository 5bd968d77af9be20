"""Sample the random partitions and verify their two guarantees empirically:
bounded cluster diameters (always) and rare separation of close pairs (in
probability).

Run:  python demos/02_random_partitions.py
"""

import numpy as np

from knnpoison import (
    GridPartitionConfig,
    LabeledDataset,
    MultiScaleConfig,
    build_neighbor_index,
    closest_pairs,
    diameter_violations,
    euclidean_poison_partition,
    sample_grid_partition,
)

rng = np.random.default_rng(7)

# --- shifted grid at a single scale ------------------------------------
pts = rng.uniform(size=(12, 2)) * 10
cells = sample_grid_partition(GridPartitionConfig(delta=4.0, d=2, seed=0), pts)
print("grid cells at delta=4:", sorted(set(cells)))

split = 0
n_draws = 2000
for seed in range(n_draws):
    cells = sample_grid_partition(GridPartitionConfig(delta=4.0, d=2, seed=seed), pts[:2])
    split += cells[0] != cells[1]
dist = float(np.linalg.norm(pts[0] - pts[1]))
print(f"pair distance {dist:.2f}: split frequency {split / n_draws:.3f}, "
      f"grid bound d*dist/delta = {2 * dist / 4.0:.3f}")

# --- multi-scale partition driven by the k-NN radius --------------------
ds = LabeledDataset(rng.uniform(size=(200, 2)), rng.integers(1, 3, size=200))
index = build_neighbor_index(ds, k=3)
config = MultiScaleConfig.guarantee(k=3, eps=1.0, d=2, seed=0)
print(f"\nguarantee constants for k=3, eps=1, d=2: log2(C) = {config.log2C}, B = {config.B}")

sample = euclidean_poison_partition(index, config)
print(f"one draw: {sample.cluster_count} clusters, largest has "
      f"{sample.max_cluster_size} members, alpha = {sample.alpha:.3f}")

violations = diameter_violations(sample, ds.points, config.B * index.gamma)
print("diameter-bound violations (must be empty):", violations)

# Close pairs rarely separate; the bound is eps * dist / (k * gamma).
pairs = closest_pairs(ds.points, 5)
n_draws = 500
counts = np.zeros(len(pairs))
for seed in range(n_draws):
    s = euclidean_poison_partition(index, MultiScaleConfig.guarantee(3, 1.0, 2, seed=seed))
    for w, (i, j) in enumerate(pairs):
        counts[w] += s.keys[i] != s.keys[j]
print("\npair  distance  split-freq  bound")
for (i, j), c in zip(pairs, counts):
    dist = float(np.linalg.norm(ds.points[i] - ds.points[j]))
    bound = dist / (3 * min(index.gamma[i], index.gamma[j]))
    print(f"({i:3d},{j:3d})  {dist:.4f}   {c / n_draws:.4f}     {bound:.4f}")

"""Walk through the geometric layer: datasets, exact k-NN queries, the
k-th neighbor radius, majority predictions, and the corruption count.

Run:  python demos/01_geometry_basics.py
"""

import numpy as np

from knnpoison import (
    LabeledDataset,
    build_neighbor_index,
    evaluate_corruption,
    flip_labels,
    gamma_of,
    predict,
)

# Three collinear points make every quantity checkable by eye.
ds = LabeledDataset(np.array([[0.0], [1.0], [3.0]]), np.array([1, 1, 2]))
index = build_neighbor_index(ds, k=1)

print("points:", ds.points.ravel().tolist())
print("labels:", ds.labels.tolist())
print("leave-one-out nearest neighbor of each point:", index.neighbors.ravel().tolist())
print("gamma (distance to the k-th neighbor):", index.gamma.tolist())

# gamma extends to any point in space and is 1-Lipschitz.
for q in (0.5, 2.0, -4.0):
    print(f"gamma at external point {q:+.1f}: {gamma_of(index, [q]):.1f}")

# Majority predictions under the original labels: the point at 3.0 is
# misclassified even before any poisoning (its neighbor is labeled 1).
for i in range(ds.n):
    print(f"point {i}: true label {ds.labels[i]}, predicted {predict(index, ds.labels, i)}")

print("corruption with no flips:", evaluate_corruption(index, ds, []))

# Flipping the point at 0.0 corrupts both other points: its neighbor at 1.0
# now sees label 2, and the point at 3.0 was already wrong.
flipped = flip_labels(ds.labels, [0])
print("labels after flipping point 0:", flipped.tolist())
print("corruption with flips {0}:", evaluate_corruption(index, ds, [0]))

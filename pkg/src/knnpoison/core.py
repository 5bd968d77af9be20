"""Geometric primitives: labeled point sets, exact k-NN queries, the k-th
neighbor radius, majority-vote prediction, and the corruption count."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DuplicatePoints, KTooLarge, UnknownQuery

VALID_LABELS = (1, 2)


def _dedupe_key(row: np.ndarray) -> tuple:
    # +0.0 collapses -0.0 and 0.0, which are distance-zero apart
    return tuple((row + 0.0).tolist())


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Points in R^d with binary labels in {1, 2}.

    Points must be pairwise distinct: a duplicate would make the k-th
    neighbor radius zero under leave-one-out queries, which the partition
    scale formula cannot accept.
    """

    points: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=np.float64))
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        # zero rows are legal (an empty test set); zero columns are not
        if pts.ndim != 2 or pts.shape[1] == 0:
            raise ValueError("points must be an n x d array with d >= 1")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must have finite coordinates")
        if labels.shape[0] != pts.shape[0]:
            raise ValueError("labels and points must have equal length")
        if not np.all(np.isin(labels, VALID_LABELS)):
            raise ValueError("labels must be 1 or 2")
        seen: dict[tuple, int] = {}
        for i in range(pts.shape[0]):
            key = _dedupe_key(pts[i])
            if key in seen:
                raise DuplicatePoints(seen[key], i)
            seen[key] = i
        pts.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, LabeledDataset):
            return NotImplemented
        return np.array_equal(self.points, other.points) and np.array_equal(
            self.labels, other.labels
        )


@dataclass(frozen=True, eq=False)
class NeighborIndex:
    """Exact ordered k-nearest-neighbor lists for a batch of query points.

    Ties are broken by ascending reference index, so the lists are a pure
    function of the inputs. Immutable after construction; concurrent reads
    are safe.
    """

    reference: LabeledDataset
    k: int
    self_mode: str
    self_indexed: bool
    query_points: np.ndarray
    neighbors: np.ndarray  # (n_queries, k) reference ids, (distance, id) ascending
    gamma: np.ndarray  # (n_queries,) distance to the k-th neighbor

    @property
    def n_queries(self) -> int:
        return self.query_points.shape[0]


def _squared_distances(queries: np.ndarray, reference: np.ndarray) -> np.ndarray:
    # square-then-reduce, the same reduction a per-pair oracle performs,
    # so accelerated and naive paths agree bit for bit
    diff = queries[:, None, :] - reference[None, :, :]
    return np.square(diff).sum(axis=2)


def build_neighbor_index(
    reference: LabeledDataset,
    queries=None,
    k: int = 1,
    self_mode: str = "exclude_self",
) -> NeighborIndex:
    """Exact brute-force k-NN lists and k-th neighbor distances.

    With ``queries=None`` the reference points query themselves;
    ``exclude_self`` then drops each point from its own candidate list
    (leave-one-out). External query arrays are matched against the full
    reference, so self_mode has no effect on them.
    """
    if self_mode not in ("exclude_self", "include_self"):
        raise ValueError(f"unknown self_mode {self_mode!r}")
    if k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    self_indexed = queries is None
    ref = reference.points
    if self_indexed:
        q = ref
    else:
        q = np.atleast_2d(np.asarray(queries, dtype=np.float64))
        if q.shape[1] != reference.d:
            raise ValueError("query dimension does not match reference")
        if not np.all(np.isfinite(q)):
            raise ValueError("queries must have finite coordinates")

    exclude = self_indexed and self_mode == "exclude_self"
    limit = reference.n - 1 if exclude else reference.n
    if k > limit:
        raise KTooLarge(k, limit)

    with np.errstate(over="ignore"):
        d2 = _squared_distances(q, ref)
    if not np.all(np.isfinite(d2)):
        raise ValueError(
            "squared pairwise distances overflow double precision; "
            "rescale coordinates to magnitudes below ~1e150"
        )
    order = np.argsort(d2, axis=1, kind="stable")
    if exclude:
        if not np.array_equal(order[:, 0], np.arange(reference.n)):
            dup = int(np.flatnonzero(order[:, 0] != np.arange(reference.n))[0])
            raise DuplicatePoints(dup, int(order[dup, 0]))
        neighbors = order[:, 1 : k + 1]
    else:
        neighbors = order[:, :k]
    rows = np.arange(q.shape[0])
    gamma = np.sqrt(d2[rows, neighbors[:, k - 1]])
    if exclude and np.any(gamma <= 0.0):
        bad = int(np.flatnonzero(gamma <= 0.0)[0])
        raise DuplicatePoints(bad, int(neighbors[bad, k - 1]))

    neighbors.setflags(write=False)
    gamma.setflags(write=False)
    return NeighborIndex(
        reference=reference,
        k=k,
        self_mode=self_mode,
        self_indexed=self_indexed,
        query_points=q,
        neighbors=neighbors,
        gamma=gamma,
    )


def gamma_of(index: NeighborIndex, q) -> float:
    """Distance from q to its k-th nearest reference point.

    q may be an indexed query id (returns the stored value) or an external
    coordinate vector (computed on the fly against the full reference).
    """
    if isinstance(q, (int, np.integer)):
        if not 0 <= q < index.n_queries:
            raise UnknownQuery(f"query id {q} out of range")
        return float(index.gamma[q])
    point = np.asarray(q, dtype=np.float64).reshape(-1)
    if point.shape[0] != index.reference.d:
        raise UnknownQuery(f"query has dimension {point.shape[0]}, expected {index.reference.d}")
    d2 = _squared_distances(point[None, :], index.reference.points)[0]
    kth = np.partition(d2, index.k - 1)[index.k - 1]
    return float(np.sqrt(kth))


def flip_labels(labels: np.ndarray, flips) -> np.ndarray:
    """Label assignment after flipping the given reference ids (1 <-> 2)."""
    out = np.array(labels, dtype=np.int64, copy=True)
    ids = np.unique(np.asarray(list(flips), dtype=np.int64))
    if ids.size:
        if ids.min() < 0 or ids.max() >= out.shape[0]:
            raise ValueError("flip ids out of range")
        out[ids] = 3 - out[ids]
    return out


def predict_all(index: NeighborIndex, labels_current: np.ndarray) -> np.ndarray:
    """Majority label over each query's k neighbors; k odd means no ties."""
    if index.k % 2 == 0:
        raise ValueError("prediction requires odd k so the binary majority is untied")
    labels_current = np.asarray(labels_current, dtype=np.int64)
    if labels_current.shape[0] != index.reference.n:
        raise ValueError("labels_current must cover every reference point")
    twos = np.count_nonzero(labels_current[index.neighbors] == 2, axis=1)
    return np.where(2 * twos > index.k, 2, 1).astype(np.int64)


def predict(index: NeighborIndex, labels_current: np.ndarray, q: int) -> int:
    """Majority label among q's k neighbors under the given label assignment."""
    if index.k % 2 == 0:
        raise ValueError("prediction requires odd k so the binary majority is untied")
    if not 0 <= q < index.n_queries:
        raise UnknownQuery(f"query id {q} out of range")
    labels_current = np.asarray(labels_current, dtype=np.int64)
    twos = int(np.count_nonzero(labels_current[index.neighbors[q]] == 2))
    return 2 if 2 * twos > index.k else 1


def evaluate_corruption(
    index: NeighborIndex,
    dataset: LabeledDataset,
    flips,
    eval_ids=None,
    *,
    eval_labels=None,
) -> int:
    """Number of eval points whose prediction under the flipped labels
    differs from their original label.

    ``dataset`` supplies the reference labels (pre-flip). For self-indexed
    evaluation the original labels of the eval points come from the same
    dataset; train/test callers pass the query-side truth via eval_labels.
    """
    if dataset.n != index.reference.n:
        raise ValueError("dataset does not match the index reference")
    flipped = flip_labels(dataset.labels, flips)
    preds = predict_all(index, flipped)
    if eval_labels is None:
        if not index.self_indexed:
            raise ValueError("eval_labels required when queries are not the reference")
        truth = dataset.labels
    else:
        truth = np.asarray(eval_labels, dtype=np.int64)
        if truth.shape[0] != index.n_queries:
            raise ValueError("eval_labels must cover every query point")
    if eval_ids is None:
        return int(np.count_nonzero(preds != truth))
    ids = np.asarray(list(eval_ids), dtype=np.int64)
    if ids.size == 0:
        return 0
    if ids.min() < 0 or ids.max() >= index.n_queries:
        raise UnknownQuery("eval id out of range")
    return int(np.count_nonzero(preds[ids] != truth[ids]))

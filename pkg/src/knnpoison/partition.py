"""Random partitions of point sets.

Two layers: a randomly shifted grid (Delta-bounded, beta = d Lipschitz),
and a multi-scale sampler that assigns every point to the grid level
matching its own radius r(x), so cluster diameters track r while nearby
points still land together with high probability. Scales are handled in
log2 space throughout because the scale base C grows like 2^(4k/eps).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import NeighborIndex, gamma_of
from .errors import NonpositiveRadius

# Cell ids saturate once a grid side leaves this exponent window; see
# _cells_at_level for the soundness argument on each side.
_LOG2_SIDE_MAX = 512.0
_LOG2_SIDE_MIN = -512.0

_KIND_ALPHA = 0
_KIND_SHIFT = 1
_KIND_GRID = 2

_MASK62 = (1 << 62) - 1
_MASK64 = (1 << 64) - 1

ClusterKey = tuple  # (level, tag, payload)


def _stream(seed: int, kind: int, level: int = 0) -> np.random.Generator:
    """Counter-based generator keyed by (seed, kind, level).

    Keyed streams make lazily materialized levels reproducible and
    independent of evaluation order.
    """
    tag = ((kind & 0x3) << 62) | (level & _MASK62)
    return np.random.Generator(np.random.Philox(key=(tag << 64) | (seed & _MASK64)))


@dataclass(frozen=True)
class GridPartitionConfig:
    """Randomly shifted grid at scale delta: cell side delta/sqrt(d), so every
    cell has diameter <= delta, and Pr[separation] <= d * dist / delta."""

    delta: float
    d: int
    seed: int = 0

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.d < 1:
            raise ValueError("d must be a positive integer")

    @property
    def side(self) -> float:
        return self.delta / math.sqrt(self.d)


@dataclass(frozen=True)
class MultiScaleConfig:
    """Constants for the multi-scale sampler.

    guarantee mode derives log2(C) = 4k/eps and B = 2*k*beta/eps, the
    combination under which the separation probability of a pair collapses
    to eps*dist/(k*gamma). practical mode takes user constants and reports
    the same bound with those constants substituted.
    """

    log2C: float
    B: float
    mode: str
    k: int
    eps: float
    beta: float
    seed: int = 0

    def __post_init__(self):
        if not self.log2C > 0:
            raise ValueError("C must exceed 1")
        if not self.B > 0:
            raise ValueError("B must be positive")
        if self.mode not in ("guarantee", "practical"):
            raise ValueError(f"unknown mode {self.mode!r}")

    @classmethod
    def guarantee(cls, k: int, eps: float, d: int, seed: int = 0) -> "MultiScaleConfig":
        if eps <= 0:
            raise ValueError("eps must be positive")
        beta = float(d)  # shifted-grid Lipschitz constant
        return cls(
            log2C=4.0 * k / eps,
            B=2.0 * k * beta / eps,
            mode="guarantee",
            k=k,
            eps=eps,
            beta=beta,
            seed=seed,
        )

    @classmethod
    def practical(
        cls, k: int, eps: float, d: int, C: float, B: float, seed: int = 0
    ) -> "MultiScaleConfig":
        if eps <= 0:
            raise ValueError("eps must be positive")
        if C <= 1:
            raise ValueError("C must exceed 1")
        return cls(
            log2C=math.log2(C),
            B=float(B),
            mode="practical",
            k=k,
            eps=eps,
            beta=float(d),
            seed=seed,
        )

    def separation_bound(self, dist: float, r_smaller: float) -> float:
        """Upper bound on Pr[two points split], using the smaller-radius endpoint."""
        if dist == 0.0:
            return 0.0
        return (2.0 * self.B / self.log2C + self.beta) * dist / r_smaller


@dataclass(frozen=True)
class PartitionSample:
    """One draw of the multi-scale partition.

    keys[i] is point i's cluster key (level, tag, payload); two points share
    a cluster iff their keys are equal. alpha is the shared level offset.
    """

    alpha: float
    keys: tuple
    clusters: dict
    seed: int
    log2C: float

    @property
    def cluster_count(self) -> int:
        return len(self.clusters)

    @property
    def max_cluster_size(self) -> int:
        return max((len(v) for v in self.clusters.values()), default=0)


def _cell_rows(points: np.ndarray, side: float, shift: np.ndarray) -> list[tuple]:
    ratios = (points + shift) / side
    if np.all(np.abs(ratios) < 2.0**62):
        cells = np.floor(ratios).astype(np.int64)
        return [tuple(int(c) for c in row) for row in cells]
    # exact fallback for coordinates far beyond int64 cell indices
    return [tuple(math.floor(v) for v in row) for row in ratios]


def sample_grid_partition(config: GridPartitionConfig, points) -> list[tuple]:
    """Cell id per point under one shifted-grid draw at scale delta."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if pts.shape[1] != config.d:
        raise ValueError("point dimension does not match config.d")
    side = config.side
    shift = _stream(config.seed, _KIND_GRID).random(config.d) * side
    return _cell_rows(pts, side, shift)


def _levels(log2r: np.ndarray, alpha: float, log2C: float) -> np.ndarray:
    return np.ceil(alpha + log2r / log2C).astype(np.int64)


def _cells_at_level(
    points: np.ndarray, level: int, seed: int, log2C: float
) -> list[ClusterKey]:
    """Cluster keys for points assigned to one grid level.

    The level-i grid has diameter C^i and side C^i/sqrt(d). Outside the
    representable exponent window the grid degenerates soundly: a huge side
    puts everything in one cell (merging only ever lowers the separation
    probability, and the level formula already caps the diameter at
    r(p)*C^2); a vanishing side splits every point into its own cell keyed
    by coordinates (a zero diameter never violates the bound, and at sides
    below 2^-512 the Lipschitz bound is vacuous for representable points).
    """
    d = points.shape[1]
    log2side = level * log2C - 0.5 * math.log2(d)
    if log2side > _LOG2_SIDE_MAX:
        key = (level, "sat", ())
        return [key] * points.shape[0]
    if log2side < _LOG2_SIDE_MIN:
        return [(level, "pt", tuple((x + 0.0) for x in row)) for row in points]
    side = 2.0**log2side
    shift = _stream(seed, _KIND_SHIFT, level).random(d) * side
    return [(level, "cell", cell) for cell in _cell_rows(points, side, shift)]


def sample_multiscale(config: MultiScaleConfig, r_values, points) -> PartitionSample:
    """One multi-scale partition draw.

    Point x goes to level ceil(alpha + log2(r(x))/log2(C)) of a family of
    shifted grids whose level-i diameter is C^i, with alpha drawn once per
    sample and one independent shift per level.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    r = np.asarray(r_values, dtype=np.float64).reshape(-1)
    if r.shape[0] != pts.shape[0]:
        raise ValueError("r_values and points must have equal length")
    if not np.all(np.isfinite(r)) or np.any(r <= 0.0):
        raise NonpositiveRadius("every radius r(x) must be positive and finite")

    alpha = float(_stream(config.seed, _KIND_ALPHA).random())
    levels = _levels(np.log2(r), alpha, config.log2C)

    keys: list[ClusterKey] = [None] * pts.shape[0]
    for lvl in np.unique(levels):
        idx = np.flatnonzero(levels == lvl)
        for i, key in zip(idx, _cells_at_level(pts[idx], int(lvl), config.seed, config.log2C)):
            keys[int(i)] = key

    grouped: dict[ClusterKey, list[int]] = {}
    for i, key in enumerate(keys):
        grouped.setdefault(key, []).append(i)
    clusters = {key: np.asarray(grouped[key], dtype=np.int64) for key in sorted(grouped)}
    return PartitionSample(
        alpha=alpha,
        keys=tuple(keys),
        clusters=clusters,
        seed=config.seed,
        log2C=config.log2C,
    )


def euclidean_poison_partition(index: NeighborIndex, config: MultiScaleConfig) -> PartitionSample:
    """Multi-scale partition of the indexed points with radii r = B * gamma."""
    if not index.self_indexed:
        raise ValueError("partition requires a self-indexed neighbor index")
    if np.any(index.gamma <= 0.0):
        raise NonpositiveRadius("gamma must be positive for every point")
    return sample_multiscale(config, config.B * index.gamma, index.query_points)


def assign_external(
    sample: PartitionSample,
    config: MultiScaleConfig,
    index: NeighborIndex,
    q,
) -> ClusterKey:
    """Cluster key of an arbitrary point under an existing sample.

    Uses the sample's alpha and per-level shifts, with r(q) = B * gamma(q)
    against the index reference. A point coordinate-equal to an indexed
    point gets that point's stored key, keeping membership consistent with
    the draw even though stored radii are leave-one-out.
    """
    if sample.seed != config.seed or sample.log2C != config.log2C:
        raise ValueError("sample was not drawn with this config")
    point = np.asarray(q, dtype=np.float64).reshape(-1)
    ref = index.reference.points
    if point.shape[0] != ref.shape[1]:
        raise ValueError("query dimension does not match the reference")
    hits = np.flatnonzero(np.all(ref == point, axis=1))
    if hits.size:
        return sample.keys[int(hits[0])]
    g = gamma_of(index, point)
    r = config.B * g
    if not r > 0.0:
        raise NonpositiveRadius(f"gamma({point.tolist()}) = {g} gives radius {r}")
    level = int(_levels(np.array([math.log2(r)]), sample.alpha, config.log2C)[0])
    return _cells_at_level(point[None, :], level, sample.seed, config.log2C)[0]


def diameter_violations(
    sample: PartitionSample, points, r_values, rtol: float = 1e-9
) -> list[tuple[int, float, float]]:
    """Points whose cluster diameter exceeds r(p) * C^2 beyond rtol.

    Compared in log2 space so astronomically large C stays representable.
    Returns (point id, cluster diameter, log2 of the point's bound).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    r = np.asarray(r_values, dtype=np.float64).reshape(-1)
    slack = math.log2(1.0 + rtol)
    bad = []
    for key, ids in sample.clusters.items():
        if ids.shape[0] < 2:
            continue
        member_pts = pts[ids]
        diff = member_pts[:, None, :] - member_pts[None, :, :]
        diam = float(np.sqrt(np.einsum("ijd,ijd->ij", diff, diff).max()))
        if diam == 0.0:
            continue
        log2diam = math.log2(diam)
        for pid in ids:
            log2bound = math.log2(r[pid]) + 2.0 * sample.log2C
            if log2diam > log2bound + slack:
                bad.append((int(pid), diam, log2bound))
    return bad


def separation_frequencies(
    config: MultiScaleConfig, r_values, points, pairs, n_samples: int
) -> np.ndarray:
    """Empirical Pr[pair split] over n_samples draws; draw t uses seed+t."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    counts = np.zeros(len(pairs), dtype=np.int64)
    for t in range(n_samples):
        sample = sample_multiscale(replace(config, seed=config.seed + t), r_values, pts)
        for w, (i, j) in enumerate(pairs):
            if sample.keys[i] != sample.keys[j]:
                counts[w] += 1
    return counts / float(n_samples)


def closest_pairs(points, count: int) -> list[tuple[int, int]]:
    """The `count` closest distinct index pairs, ties broken by (i, j)."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    n = pts.shape[0]
    diff = pts[:, None, :] - pts[None, :, :]
    d2 = np.einsum("ijd,ijd->ij", diff, diff)
    iu, ju = np.triu_indices(n, k=1)
    order = np.lexsort((ju, iu, d2[iu, ju]))
    take = order[: min(count, iu.shape[0])]
    return [(int(iu[t]), int(ju[t])) for t in take]

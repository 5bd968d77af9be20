"""Run configuration and per-run statistics records."""

from __future__ import annotations

from dataclasses import dataclass, field, fields

MODES = ("guarantee", "practical", "greedy")
SELF_MODES = ("exclude_self", "include_self")

DEFAULT_CLUSTER_CAP = 25
DEFAULT_SUBSET_LIMIT = 10_000_000


@dataclass(frozen=True)
class RunConfig:
    """Knobs for one attack run; echoed verbatim into the plan output.

    workers is execution width, never part of run identity: plans computed
    at different worker counts must compare equal.
    """

    k: int
    m: int
    eps: float
    mode: str = "guarantee"
    c_override: float | None = None
    b_override: float | None = None
    seed: int = 0
    self_mode: str = "exclude_self"
    cluster_cap: int = DEFAULT_CLUSTER_CAP
    subset_limit: int = DEFAULT_SUBSET_LIMIT
    workers: int = field(default=1, compare=False)
    trials: int = 1

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.self_mode not in SELF_MODES:
            raise ValueError(f"self_mode must be one of {SELF_MODES}, got {self.self_mode!r}")
        if self.k < 1 or self.k % 2 == 0:
            raise ValueError(f"k must be a positive odd integer, got {self.k}")
        if self.m < 0:
            raise ValueError(f"m must be non-negative, got {self.m}")
        if self.mode == "guarantee":
            if self.eps <= 0:
                raise ValueError("guarantee mode requires eps > 0")
            if self.c_override is not None or self.b_override is not None:
                raise ValueError("guarantee mode forbids C/B overrides")
        elif self.mode == "practical":
            if self.eps <= 0:
                raise ValueError("practical mode requires eps > 0")
            if self.c_override is None or self.b_override is None:
                raise ValueError("practical mode requires both C and B overrides")
            if self.c_override <= 1:
                raise ValueError("C override must exceed 1")
            if self.b_override <= 0:
                raise ValueError("B override must be positive")
        else:  # greedy baseline: scale constants unused
            if self.c_override is not None or self.b_override is not None:
                raise ValueError("greedy mode has no C/B overrides")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.cluster_cap < 1:
            raise ValueError("cluster_cap must be >= 1")
        if self.subset_limit < 1:
            raise ValueError("subset_limit must be >= 1")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))


@dataclass(frozen=True)
class TrialStats:
    """Outcome of one partition draw inside a multi-trial run."""

    trial: int
    seed: int
    evaluated: int
    certified: int
    discarded: int
    cluster_count: int
    max_cluster_size: int


@dataclass(frozen=True)
class PartitionStats:
    """Partition shape summary for the plan that was kept."""

    cluster_count: int
    max_cluster_size: int
    discarded_count: int
    per_trial: tuple[TrialStats, ...] = field(default_factory=tuple)

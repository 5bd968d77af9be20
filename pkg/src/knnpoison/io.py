"""Dataset ingestion and plan serialization.

CSV datasets carry a `x1,...,xd,label` header; plans are strict-schema
JSON documents whose point ids are 0-based CSV row positions, so flip
sets remain stable references into the file they were computed from.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .config import PartitionStats, RunConfig, TrialStats
from .core import LabeledDataset
from .errors import DuplicatePoints, ParseError
from .poison import PoisonPlan

PLAN_KEYS = (
    "flips",
    "certified_interior_corruption",
    "evaluated_corruption",
    "discarded_count",
    "config",
    "partition_stats",
    "timing_ms",
)
STATS_KEYS = ("cluster_count", "max_cluster_size", "discarded_count", "per_trial")
TRIAL_KEYS = (
    "trial",
    "seed",
    "evaluated",
    "certified",
    "discarded",
    "cluster_count",
    "max_cluster_size",
)


def load_dataset(path) -> LabeledDataset:
    """Read a CSV point set: header x1,...,xd,label, labels in {1, 2}.

    Line numbers in errors are 1-based file lines (the header is line 1).
    Rejects non-finite coordinates, out-of-range labels, and duplicate rows.
    """
    path = Path(path)
    with path.open(newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(1, "empty file") from None
        d = len(header) - 1
        expected = [f"x{i}" for i in range(1, d + 1)] + ["label"]
        if d < 1 or header != expected:
            raise ParseError(1, f"header must be x1,...,xd,label; got {','.join(header)}")

        points: list[list[float]] = []
        labels: list[int] = []
        seen: dict[tuple, int] = {}
        for line, row in enumerate(reader, start=2):
            if len(row) != d + 1:
                raise ParseError(line, f"expected {d + 1} fields, got {len(row)}")
            coords = []
            for j, text in enumerate(row[:d]):
                try:
                    value = float(text)
                except ValueError:
                    raise ParseError(line, f"bad coordinate {text!r} in column x{j + 1}") from None
                if not math.isfinite(value):
                    raise ParseError(line, f"non-finite coordinate in column x{j + 1}")
                coords.append(value)
            try:
                label = int(row[d])
            except ValueError:
                raise ParseError(line, f"label must be an integer, got {row[d]!r}") from None
            if label not in (1, 2):
                raise ParseError(line, f"label out of range: {label}")
            key = tuple(c + 0.0 for c in coords)
            if key in seen:
                raise DuplicatePoints(seen[key], line, f"lines {seen[key]} and {line} are identical points")
            seen[key] = line
            points.append(coords)
            labels.append(label)
    if not points:
        raise ParseError(2, "no data rows")
    return LabeledDataset(np.asarray(points), np.asarray(labels))


def write_dataset(dataset: LabeledDataset, path) -> None:
    """Write a dataset in the CSV schema load_dataset reads, losslessly."""
    path = Path(path)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow([f"x{i}" for i in range(1, dataset.d + 1)] + ["label"])
        for row, label in zip(dataset.points, dataset.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])


def plan_to_dict(plan: PoisonPlan) -> dict:
    stats = plan.partition_stats
    return {
        "flips": [int(i) for i in plan.flips],
        "certified_interior_corruption": int(plan.certified_interior_corruption),
        "evaluated_corruption": int(plan.evaluated_corruption),
        "discarded_count": int(plan.discarded_count),
        "config": plan.config.to_dict(),
        "partition_stats": {
            "cluster_count": int(stats.cluster_count),
            "max_cluster_size": int(stats.max_cluster_size),
            "discarded_count": int(stats.discarded_count),
            "per_trial": [
                {
                    "trial": t.trial,
                    "seed": t.seed,
                    "evaluated": t.evaluated,
                    "certified": t.certified,
                    "discarded": t.discarded,
                    "cluster_count": t.cluster_count,
                    "max_cluster_size": t.max_cluster_size,
                }
                for t in stats.per_trial
            ],
        },
        "timing_ms": None if plan.timing_ms is None else float(plan.timing_ms),
    }


def write_plan(plan: PoisonPlan, path) -> None:
    """Serialize a plan as strict-schema JSON; read_plan round-trips it."""
    path = Path(path)
    with path.open("w") as handle:
        json.dump(plan_to_dict(plan), handle, indent=2)
        handle.write("\n")


def _require_keys(obj: dict, keys: tuple[str, ...], where: str) -> None:
    if not isinstance(obj, dict):
        raise ParseError(None, f"{where} must be a JSON object")
    missing = [k for k in keys if k not in obj]
    unknown = [k for k in obj if k not in keys]
    if missing:
        raise ParseError(None, f"{where} missing keys: {', '.join(missing)}")
    if unknown:
        raise ParseError(None, f"{where} has unknown keys: {', '.join(unknown)}")


def _as_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(None, f"{where} must be an integer")
    return value


def read_plan(path) -> PoisonPlan:
    """Parse a plan JSON document, rejecting any schema deviation."""
    path = Path(path)
    try:
        with path.open() as handle:
            doc = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, f"invalid JSON: {exc.msg}") from None
    _require_keys(doc, PLAN_KEYS, "plan")

    flips_raw = doc["flips"]
    if not isinstance(flips_raw, list):
        raise ParseError(None, "flips must be a list")
    flips = tuple(sorted(_as_int(v, "flip id") for v in flips_raw))

    cfg_raw = doc["config"]
    _require_keys(cfg_raw, RunConfig.field_names(), "config")
    try:
        config = RunConfig(**cfg_raw)
        config.validate()
    except (TypeError, ValueError) as exc:
        raise ParseError(None, f"bad config: {exc}") from None

    stats_raw = doc["partition_stats"]
    _require_keys(stats_raw, STATS_KEYS, "partition_stats")
    if not isinstance(stats_raw["per_trial"], list):
        raise ParseError(None, "per_trial must be a list")
    trials = []
    for entry in stats_raw["per_trial"]:
        _require_keys(entry, TRIAL_KEYS, "per_trial entry")
        trials.append(TrialStats(**{k: _as_int(entry[k], k) for k in TRIAL_KEYS}))
    stats = PartitionStats(
        cluster_count=_as_int(stats_raw["cluster_count"], "cluster_count"),
        max_cluster_size=_as_int(stats_raw["max_cluster_size"], "max_cluster_size"),
        discarded_count=_as_int(stats_raw["discarded_count"], "discarded_count"),
        per_trial=tuple(trials),
    )

    timing = doc["timing_ms"]
    if timing is not None and not isinstance(timing, (int, float)):
        raise ParseError(None, "timing_ms must be a number or null")

    return PoisonPlan(
        flips=flips,
        certified_interior_corruption=_as_int(
            doc["certified_interior_corruption"], "certified_interior_corruption"
        ),
        evaluated_corruption=_as_int(doc["evaluated_corruption"], "evaluated_corruption"),
        discarded_count=_as_int(doc["discarded_count"], "discarded_count"),
        config=config,
        partition_stats=stats,
        timing_ms=None if timing is None else float(timing),
    )

"""Tagged arrays of i.i.d. scalar samples with provenance metadata."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SampleSet:
    """Array of i.i.d. scalar samples plus the metadata needed to replay it.

    ``meta`` carries at least the seed and sample count; simulation-produced
    sets add the metric, horizon, initial-distribution and policy tags.
    """

    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise ValueError(f"values must be a non-empty 1-d array, got shape {values.shape}")
        if not np.isfinite(values).all():
            raise ValueError("sample values must all be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    def mean(self) -> float:
        return float(self.values.mean())

    def std(self, ddof: int = 1) -> float:
        return float(self.values.std(ddof=ddof))


def save_sample_set(samples: SampleSet, csv_path, json_path=None) -> None:
    """Write (index, cost) rows plus a JSON sidecar with the metadata."""
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "cost"])
        for i, v in enumerate(samples.values):
            writer.writerow([i, repr(float(v))])
    if json_path is not None:
        with open(json_path, "w") as fh:
            json.dump(dict(samples.meta), fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")


def load_sample_set(csv_path, json_path=None) -> SampleSet:
    values = []
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:2] != ["index", "cost"]:
            raise ValueError(f"unexpected sample CSV header: {header}")
        for row in reader:
            values.append(float(row[1]))
    meta = {}
    if json_path is not None:
        with open(json_path) as fh:
            meta = json.load(fh)
    return SampleSet(values=np.asarray(values), meta=meta)

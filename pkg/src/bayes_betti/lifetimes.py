"""Lifetimes of one homology level, ready for the partition model."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .homology import PersistenceDiagram, metadata_path


@dataclass
class LifetimeSample:
    """Sorted positive lifetimes ``death - birth`` of level ``h``.

    ``removed_at_max`` counts features whose death hit ``eps_max`` and were
    dropped; at level 0 this is the component that never dies.
    """

    h: int
    lifetimes: np.ndarray
    removed_at_max: int = 0

    def __post_init__(self):
        lt = np.sort(np.asarray(self.lifetimes, dtype=float).ravel())
        if lt.size and (not np.all(np.isfinite(lt)) or lt[0] <= 0):
            raise ValueError("lifetimes must be finite and strictly positive")
        self.lifetimes = lt

    @property
    def logs(self) -> np.ndarray:
        return np.log(self.lifetimes)

    @property
    def n(self) -> int:
        return self.lifetimes.size


def extract_lifetimes(diag: PersistenceDiagram, h: int, min_size: int = 2) -> LifetimeSample:
    """Lifetimes at level ``h`` with the features that reach ``eps_max`` removed."""
    if h not in diag.features:
        raise ValueError(f"diagram has no level {h} (levels: {diag.levels})")
    pairs = diag[h]
    at_max = pairs[:, 1] >= diag.eps_max
    lt = pairs[~at_max, 1] - pairs[~at_max, 0]
    # zero-persistence pairs cannot enter a log-normal model
    lt = lt[lt > 0]
    if lt.size < min_size:
        raise ValueError(f"level {h} has {lt.size} finite lifetimes; the model needs at least {min_size}")
    return LifetimeSample(h=h, lifetimes=lt, removed_at_max=int(at_max.sum()))


def write_lifetimes_csv(sample: LifetimeSample, path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["lifetime"])
        for v in sample.lifetimes:
            writer.writerow([f"{v:.17g}"])
    meta = {"h": sample.h, "removed_at_max": sample.removed_at_max}
    metadata_path(path).write_text(json.dumps(meta) + "\n", encoding="utf-8")
    return path


def load_lifetimes_csv(path) -> LifetimeSample:
    path = Path(path)
    meta_file = metadata_path(path)
    if not meta_file.exists():
        raise FileNotFoundError(f"missing lifetime metadata {meta_file}")
    meta = json.loads(meta_file.read_text(encoding="utf-8"))
    values = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header] != ["lifetime"]:
            raise ValueError(f"{path}: expected header 'lifetime'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                values.append(float(row[0]))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: malformed lifetime {row[0]!r}") from None
    return LifetimeSample(h=int(meta["h"]), lifetimes=np.asarray(values), removed_at_max=int(meta.get("removed_at_max", 0)))

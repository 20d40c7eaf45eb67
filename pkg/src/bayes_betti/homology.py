"""Vietoris-Rips persistence up to homology level 2.

Filtration values are half pairwise distances: an edge ``xy`` enters at
``eps = d(x, y) / 2``. Columns of the boundary matrix are stored as Python
integers used as bitsets over simplex indices, so adding columns over the
two-element field is a single XOR and the pivot is ``bit_length() - 1``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.spatial.distance import pdist, squareform

from ._validation import check_point_cloud


class Simplex(NamedTuple):
    vertices: tuple[int, ...]
    value: float

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1


@dataclass
class Filtration:
    simplices: list[Simplex]
    eps_max: float
    max_dim: int

    def __len__(self):
        return len(self.simplices)


@dataclass
class PersistenceDiagram:
    """Per-level multisets of ``(birth, death)`` pairs.

    ``features[h]`` is an array of shape ``(m, 2)``. Essential classes carry
    ``death == eps_max``.
    """

    eps_max: float
    features: dict[int, np.ndarray] = field(default_factory=dict)
    n_points: int | None = None

    def __post_init__(self):
        clean = {}
        for h, pairs in self.features.items():
            arr = np.asarray(pairs, dtype=float).reshape(-1, 2)
            if arr.size and np.any(arr[:, 0] > arr[:, 1]):
                raise ValueError(f"level {h} has a feature with birth > death")
            clean[int(h)] = arr
        self.features = clean

    @property
    def levels(self) -> list[int]:
        return sorted(self.features)

    def __getitem__(self, h: int) -> np.ndarray:
        return self.features.get(h, np.empty((0, 2)))

    def to_array(self) -> np.ndarray:
        """Rows ``(dim, birth, death)``, ordered by level then by pair."""
        rows = []
        for h in self.levels:
            pairs = self.features[h]
            order = np.lexsort((pairs[:, 1], pairs[:, 0])) if len(pairs) else []
            for b, d in pairs[order]:
                rows.append((h, b, d))
        return np.asarray(rows, dtype=float).reshape(-1, 3)

    def same_as(self, other: "PersistenceDiagram") -> bool:
        """Exact multiset equality over all levels present in either diagram."""
        for h in set(self.levels) | set(other.levels):
            a, b = self[h], other[h]
            if a.shape != b.shape:
                return False
            ka = a[np.lexsort((a[:, 1], a[:, 0]))]
            kb = b[np.lexsort((b[:, 1], b[:, 0]))]
            if not np.array_equal(ka, kb):
                return False
        return True


def _half_distances(points: np.ndarray) -> np.ndarray:
    return squareform(pdist(points)) / 2.0


def enclosing_radius(points) -> float:
    """Half the diameter of the cloud."""
    points = check_point_cloud(points)
    if len(points) < 2:
        return 0.0
    return float(pdist(points).max() / 2.0)


def build_rips_filtration(cloud, eps_max: float, max_dim: int = 2) -> Filtration:
    """All Rips simplices of dimension ``<= max_dim`` with value ``<= eps_max``.

    Sorted by ``(value, dim, vertices)``, which places every face before its
    cofaces since a face never has a larger value.
    """
    points = check_point_cloud(cloud)
    if eps_max < 0:
        raise ValueError("eps_max must be nonnegative")
    if max_dim not in (1, 2, 3):
        raise ValueError(f"max_dim must be 1, 2 or 3, got {max_dim}")
    n = len(points)
    half = _half_distances(points)
    simplices = [Simplex((i,), 0.0) for i in range(n)]

    neighbors: list[set[int]] = [set() for _ in range(n)]
    iu, ju = np.triu_indices(n, k=1)
    mask = half[iu, ju] <= eps_max
    for i, j in zip(iu[mask].tolist(), ju[mask].tolist()):
        neighbors[i].add(j)
        simplices.append(Simplex((i, j), float(half[i, j])))

    # grow cliques by adding higher-indexed common neighbors
    frontier = [s for s in simplices if s.dim == 1]
    for _ in range(2, max_dim + 1):
        grown = []
        for verts, value in frontier:
            common = set.intersection(*(neighbors[u] for u in verts))
            for v in sorted(common):
                new_value = max(value, max(float(half[u, v]) for u in verts))
                grown.append(Simplex(verts + (v,), new_value))
        simplices.extend(grown)
        frontier = grown

    simplices.sort(key=lambda s: (s.value, len(s.vertices), s.vertices))
    return Filtration(simplices=simplices, eps_max=float(eps_max), max_dim=max_dim)


def reduce_filtration(filt: Filtration) -> tuple[list[tuple[int, int]], list[int]]:
    """Column-reduce the boundary matrix over Z/2.

    Returns the ``(creator, destroyer)`` index pairs and the indices of
    unpaired simplices. Dimensions are processed top-down so columns of
    simplices known to be creators can be cleared without reduction.
    """
    index = {s.vertices: i for i, s in enumerate(filt.simplices)}
    by_dim: dict[int, list[int]] = {}
    for i, s in enumerate(filt.simplices):
        by_dim.setdefault(s.dim, []).append(i)

    pairs = []
    cleared = set()
    paired = set()
    for d in sorted(by_dim, reverse=True):
        if d == 0:
            break
        pivot_owner: dict[int, int] = {}
        reduced: dict[int, int] = {}
        for j in by_dim[d]:
            if j in cleared:
                continue
            verts = filt.simplices[j].vertices
            col = 0
            for drop in range(len(verts)):
                col ^= 1 << index[verts[:drop] + verts[drop + 1:]]
            while col:
                low = col.bit_length() - 1
                other = pivot_owner.get(low)
                if other is None:
                    break
                col ^= reduced[other]
            if col:
                low = col.bit_length() - 1
                pivot_owner[low] = j
                reduced[j] = col
                pairs.append((low, j))
                paired.add(low)
                paired.add(j)
                cleared.add(low)
    unpaired = [i for i in range(len(filt.simplices)) if i not in paired]
    pairs.sort()
    return pairs, unpaired


def compute_persistence(filt: Filtration) -> PersistenceDiagram:
    """Persistence diagram for levels ``0 .. max_dim - 1``."""
    pairs, unpaired = reduce_filtration(filt)
    simplices = filt.simplices
    levels = range(filt.max_dim)
    features: dict[int, list[tuple[float, float]]] = {h: [] for h in levels}
    for i, j in pairs:
        s = simplices[i]
        birth, death = s.value, simplices[j].value
        if s.dim in features and birth != death:
            features[s.dim].append((birth, death))
    for i in unpaired:
        s = simplices[i]
        if s.dim in features and s.value != filt.eps_max:
            features[s.dim].append((s.value, filt.eps_max))
    n_points = sum(1 for s in simplices if s.dim == 0)
    return PersistenceDiagram(filt.eps_max, {h: np.asarray(v).reshape(-1, 2) for h, v in features.items()}, n_points)


class UnionFind:
    """Disjoint sets with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.n_sets = n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, x: int, y: int) -> bool:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        if self.size[rx] < self.size[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        self.size[rx] += self.size[ry]
        self.n_sets -= 1
        return True


def zero_dim_persistence(cloud, eps_max: float) -> PersistenceDiagram:
    """Level-0 diagram from single-linkage merges (Kruskal on the Rips graph)."""
    points = check_point_cloud(cloud)
    if not eps_max > 0:
        raise ValueError("eps_max must be positive")
    n = len(points)
    features = []
    if n > 1:
        half = pdist(points) / 2.0
        iu, ju = np.triu_indices(n, k=1)
        keep = half <= eps_max
        half, iu, ju = half[keep], iu[keep], ju[keep]
        order = np.argsort(half, kind="stable")
        uf = UnionFind(n)
        for e in order.tolist():
            if uf.union(int(iu[e]), int(ju[e])):
                death = float(half[e])
                if death > 0.0:
                    features.append((0.0, death))
                if uf.n_sets == 1:
                    break
        n_sets = uf.n_sets
    else:
        n_sets = 1
    features.extend([(0.0, float(eps_max))] * n_sets)
    return PersistenceDiagram(float(eps_max), {0: np.asarray(features).reshape(-1, 2)}, n)


def rips_persistence(cloud, eps_max: float, max_dim: int = 1) -> PersistenceDiagram:
    """Diagram up to level ``max_dim - 1``, using the union-find path when only level 0 is needed."""
    if max_dim == 1:
        return zero_dim_persistence(cloud, eps_max)
    return compute_persistence(build_rips_filtration(cloud, eps_max, max_dim))


# -- file formats ---------------------------------------------------------

def metadata_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".meta.json")


def write_diagram_csv(diagram: PersistenceDiagram, path) -> Path:
    """Write ``dim,birth,death`` rows plus the ``.meta.json`` sidecar."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["dim", "birth", "death"])
        for h, b, d in diagram.to_array():
            writer.writerow([int(h), f"{b:.17g}", f"{d:.17g}"])
    meta = {"eps_max": diagram.eps_max, "n_points": diagram.n_points}
    metadata_path(path).write_text(json.dumps(meta) + "\n", encoding="utf-8")
    return path


def load_diagram_csv(path) -> PersistenceDiagram:
    """Read a diagram CSV and its sidecar; rows are validated one by one."""
    path = Path(path)
    meta_file = metadata_path(path)
    if not meta_file.exists():
        raise FileNotFoundError(f"missing diagram metadata {meta_file}")
    meta = json.loads(meta_file.read_text(encoding="utf-8"))
    if "eps_max" not in meta:
        raise ValueError(f"{meta_file}: metadata lacks 'eps_max'")
    features: dict[int, list] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["dim", "birth", "death"]:
            raise ValueError(f"{path}: expected header 'dim,birth,death'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                if len(row) != 3:
                    raise ValueError(f"expected 3 fields, got {len(row)}")
                h, b, d = int(row[0]), float(row[1]), float(row[2])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: malformed row {row!r} ({exc})") from None
            if h < 0:
                raise ValueError(f"{path}:{lineno}: negative homology level {h}")
            if not (np.isfinite(b) and np.isfinite(d)):
                raise ValueError(f"{path}:{lineno}: non-finite value in row {row!r}")
            if b < 0:
                raise ValueError(f"{path}:{lineno}: negative birth {b}")
            if b > d:
                raise ValueError(f"{path}:{lineno}: birth {b} exceeds death {d}")
            features.setdefault(h, []).append((b, d))
    n_points = meta.get("n_points")
    return PersistenceDiagram(
        float(meta["eps_max"]),
        {h: np.asarray(v) for h, v in features.items()},
        None if n_points is None else int(n_points),
    )

"""Synthetic point clouds: noisy unit circles and spheres on a Fibonacci lattice."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0
CIRCLE_RADIUS = 1.0


@dataclass(frozen=True)
class GeneratorConfig:
    shape: Literal["circles", "fibonacci_spheres"] = "circles"
    r: int = 1
    n: int = 600
    d_x: float = 5.0
    d_y: float = 5.0
    sigma: float = 0.0
    n_spheres: int = 30
    pts_per_sphere: int = 50
    sphere_radius: float = 1.0
    lattice_radius: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if self.shape not in ("circles", "fibonacci_spheres"):
            raise ValueError(f"unknown shape {self.shape!r}")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if self.shape == "circles":
            if self.r not in (1, 2, 3):
                raise ValueError(f"r must be 1, 2 or 3, got {self.r}")
            if self.n < self.r:
                raise ValueError(f"n={self.n} is smaller than the number of circles r={self.r}")
            if self.r >= 2 and not (self.d_x > 0 and self.d_y > 0):
                raise ValueError("center separations d_x, d_y must be positive")
        else:
            if self.n_spheres < 1 or self.pts_per_sphere < 1:
                raise ValueError("n_spheres and pts_per_sphere must be >= 1")
            if not (self.sphere_radius > 0 and self.lattice_radius > 0):
                raise ValueError("sphere_radius and lattice_radius must be positive")

    @property
    def total(self) -> int:
        return self.n if self.shape == "circles" else self.n_spheres * self.pts_per_sphere


@dataclass
class PointCloud:
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] not in (2, 3):
            raise ValueError(f"a point cloud needs shape (n >= 1, 2 or 3), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        self.points = pts

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.points if dtype is None else self.points.astype(dtype)


def circle_centers(r: int, d_x: float, d_y: float) -> np.ndarray:
    """Centers for 1, 2 or 3 circles: origin, then ``d_x`` to the right, then apex at height ``d_y``."""
    centers = [(0.0, 0.0), (d_x, 0.0), (d_x / 2.0, d_y)]
    return np.asarray(centers[:r])


def sample_circles(cfg: GeneratorConfig) -> PointCloud:
    if cfg.shape != "circles":
        raise ValueError("config shape is not 'circles'")
    rng = np.random.default_rng(cfg.seed)
    centers = circle_centers(cfg.r, cfg.d_x, cfg.d_y)
    counts = np.full(cfg.r, cfg.n // cfg.r)
    counts[: cfg.n % cfg.r] += 1
    owner = np.repeat(np.arange(cfg.r), counts)
    angle = rng.uniform(0.0, 2.0 * math.pi, size=cfg.n)
    pts = centers[owner] + CIRCLE_RADIUS * np.column_stack((np.cos(angle), np.sin(angle)))
    if cfg.sigma > 0:
        pts = pts + rng.normal(0.0, cfg.sigma, size=pts.shape)
    return PointCloud(pts)


def fibonacci_lattice(count: int, radius: float = 1.0) -> np.ndarray:
    """``count`` points spread on a sphere by the golden-angle spiral."""
    i = np.arange(count)
    z = 1.0 - (2.0 * i + 1.0) / count
    azimuth = 2.0 * math.pi * i / GOLDEN_RATIO
    rho = np.sqrt(1.0 - z * z)
    return radius * np.column_stack((rho * np.cos(azimuth), rho * np.sin(azimuth), z))


def sample_fibonacci_spheres(cfg: GeneratorConfig) -> PointCloud:
    if cfg.shape != "fibonacci_spheres":
        raise ValueError("config shape is not 'fibonacci_spheres'")
    rng = np.random.default_rng(cfg.seed)
    centers = fibonacci_lattice(cfg.n_spheres, cfg.lattice_radius)
    g = rng.normal(size=(cfg.n_spheres * cfg.pts_per_sphere, 3))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    pts = np.repeat(centers, cfg.pts_per_sphere, axis=0) + cfg.sphere_radius * g
    if cfg.sigma > 0:
        pts = pts + rng.normal(0.0, cfg.sigma, size=pts.shape)
    return PointCloud(pts)


def generate(cfg: GeneratorConfig) -> PointCloud:
    if cfg.shape == "circles":
        return sample_circles(cfg)
    return sample_fibonacci_spheres(cfg)


def write_cloud_csv(cloud: PointCloud, path) -> Path:
    path = Path(path)
    header = ["x", "y", "z"][: cloud.dim]
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in cloud.points:
            writer.writerow([f"{v:.17g}" for v in row])
    return path


def read_cloud_csv(path) -> PointCloud:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if header not in (["x", "y"], ["x", "y", "z"]):
            raise ValueError(f"{path}: expected header 'x,y' or 'x,y,z', got {','.join(header)!r}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric value in {row!r}") from None
    if not rows:
        raise ValueError(f"{path}: no points")
    return PointCloud(np.asarray(rows))

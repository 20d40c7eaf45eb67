"""Seeded replication runner and error tables for synthetic designs."""

from __future__ import annotations

import csv
import itertools
import json
import logging
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed

from ._validation import resolve_eps_max
from .estimators import summarize
from .homology import rips_persistence
from .lifetimes import extract_lifetimes
from .partition_model import NormalGammaParams
from .sampler import ChainConfig, run_chain
from .synthgen import GeneratorConfig, generate

logger = logging.getLogger(__name__)

SEED_ENV_VAR = "BAYES_BETTI_SEED"
DEFAULT_MAX_POINTS = {0: 600, 1: 200, 2: 200}


@dataclass
class ExperimentConfig:
    shape: str = "circles"
    r: list[int] = field(default_factory=lambda: [1])
    n: list[int] = field(default_factory=lambda: [300])
    d_x: list[float] = field(default_factory=lambda: [5.0])
    d_y: list[float] = field(default_factory=lambda: [5.0])
    sigma: list[float] = field(default_factory=lambda: [0.0])
    n_spheres: list[int] = field(default_factory=lambda: [10])
    pts_per_sphere: list[int] = field(default_factory=lambda: [30])
    sphere_radius: float = 1.0
    lattice_radius: float = 5.0
    s: int = 20
    levels: list[int] = field(default_factory=lambda: [0])
    chain: ChainConfig = field(default_factory=ChainConfig)
    p0: float = 0.3
    tau_overlap: float = 0.03
    eps_max_policy: str | float = "enclosing"
    base_seed: int = 0
    output_dir: str | None = None
    n_jobs: int = 1
    max_points: dict[int, int] = field(default_factory=lambda: dict(DEFAULT_MAX_POINTS))

    def __post_init__(self):
        if self.shape not in ("circles", "fibonacci_spheres"):
            raise ValueError(f"unknown shape {self.shape!r}")
        if self.s < 1:
            raise ValueError("s must be >= 1")
        if not self.levels or not set(self.levels) <= {0, 1, 2}:
            raise ValueError(f"levels must be a nonempty subset of {{0, 1, 2}}, got {self.levels}")
        if not 0.0 <= self.p0 <= 1.0:
            raise ValueError("p0 must lie in [0, 1]")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown experiment config keys: {sorted(unknown)}")
        for key in ("r", "n", "d_x", "d_y", "sigma", "n_spheres", "pts_per_sphere", "levels"):
            if key in d and not isinstance(d[key], list):
                d[key] = [d[key]]
        if "chain" in d:
            c = dict(d["chain"])
            ng = NormalGammaParams(*(float(c.pop(k, v)) for k, v in zip("mcab", (0.0, 0.5, 1.1, 0.1))))
            theta_prior = (float(c.pop("theta_alpha", 1.1)), float(c.pop("theta_beta", 0.1)))
            d["chain"] = ChainConfig(ng=ng, theta_prior=theta_prior, **c)
        if "max_points" in d:
            d["max_points"] = {int(k): int(v) for k, v in d["max_points"].items()}
        return cls(**d)

    def to_dict(self) -> dict:
        out = asdict(self)
        chain = out.pop("chain")
        ng = chain.pop("ng")
        alpha, beta = chain.pop("theta_prior")
        chain.pop("seed")
        out["chain"] = {**chain, **ng, "theta_alpha": alpha, "theta_beta": beta}
        out["max_points"] = {str(k): v for k, v in self.max_points.items()}
        return out

    def cells(self) -> list[dict]:
        """Design cells as generator keyword sets, in a fixed order."""
        cells = []
        if self.shape == "circles":
            for r, n, sigma in itertools.product(self.r, self.n, self.sigma):
                d_xs = self.d_x if r >= 2 else [None]
                d_ys = self.d_y if r == 3 else [None]
                for d_x, d_y in itertools.product(d_xs, d_ys):
                    cells.append({"shape": "circles", "r": r, "n": n, "sigma": sigma, "d_x": d_x, "d_y": d_y})
        else:
            for n_sph, pts, sigma in itertools.product(self.n_spheres, self.pts_per_sphere, self.sigma):
                cells.append({"shape": "fibonacci_spheres", "n_spheres": n_sph, "pts_per_sphere": pts, "sigma": sigma})
        return cells


def true_betti(cell: dict, h: int) -> int:
    if cell["shape"] == "circles":
        return cell["r"] if h in (0, 1) else 0
    return {0: cell["n_spheres"], 1: 0, 2: cell["n_spheres"]}[h]


def generator_config(cell: dict, cfg: ExperimentConfig, seed: int) -> GeneratorConfig:
    if cell["shape"] == "circles":
        return GeneratorConfig(
            shape="circles",
            r=cell["r"],
            n=cell["n"],
            d_x=cell["d_x"] if cell["d_x"] is not None else 5.0,
            d_y=cell["d_y"] if cell["d_y"] is not None else 5.0,
            sigma=cell["sigma"],
            seed=seed,
        )
    return GeneratorConfig(
        shape="fibonacci_spheres",
        n_spheres=cell["n_spheres"],
        pts_per_sphere=cell["pts_per_sphere"],
        sphere_radius=cfg.sphere_radius,
        lattice_radius=cfg.lattice_radius,
        sigma=cell["sigma"],
        seed=seed,
    )


def chain_seed(seed: int, h: int) -> int:
    return int(np.random.SeedSequence([seed, 1, h]).generate_state(1, np.uint64)[0] >> 1)


def cell_key(cell: dict) -> str:
    parts = [cell["shape"]]
    for k in ("r", "n", "n_spheres", "pts_per_sphere", "sigma", "d_x", "d_y"):
        if k in cell and cell[k] is not None:
            parts.append(f"{k}{cell[k]:g}" if isinstance(cell[k], float) else f"{k}{cell[k]}")
    return "_".join(parts)


def run_replication(cell: dict, cfg: ExperimentConfig, rep: int) -> list[dict]:
    """One cloud, one diagram, one chain per level; failures become records, not exceptions."""
    seed = cfg.base_seed + rep
    gen = generator_config(cell, cfg, seed)
    records = []
    try:
        points = generate(gen).points
        eps = resolve_eps_max(cfg.eps_max_policy, points)
        diagram = rips_persistence(points, eps, max(cfg.levels) + 1)
    except Exception as exc:  # noqa: BLE001 - a broken replication is scored, not fatal
        logger.warning("replication %s/%d failed before fitting: %s", cell_key(cell), rep, exc)
        return [_failure(cell, rep, seed, h, exc) for h in cfg.levels]

    for h in cfg.levels:
        try:
            sample = extract_lifetimes(diagram, h)
            chain_cfg = replace(cfg.chain, seed=chain_seed(seed, h), keep_trace=False)
            out = run_chain(sample.logs, chain_cfg)
            summary = summarize(out, sample.logs, chain_cfg.ng, h, sample.removed_at_max, cfg.p0, cfg.tau_overlap)
        except ValueError as exc:
            records.append(_failure(cell, rep, seed, h, exc))
            continue
        records.append(
            {
                "cell": cell,
                "rep": rep,
                "seed": seed,
                "level": h,
                "eps_max": eps,
                "beta_true": true_betti(cell, h),
                "beta_hat": summary.beta_hat,
                "beta_check": summary.beta_check,
                "failed": False,
                "summary": summary.to_dict(),
            }
        )
    return records


def _failure(cell: dict, rep: int, seed: int, h: int, exc: Exception) -> dict:
    return {
        "cell": cell,
        "rep": rep,
        "seed": seed,
        "level": h,
        "beta_true": true_betti(cell, h),
        "beta_hat": None,
        "beta_check": None,
        "failed": True,
        "error": str(exc),
    }


@dataclass
class ErrorTable:
    rows: list[dict]

    COLUMNS = ("shape", "r", "n", "n_spheres", "pts_per_sphere", "sigma", "d_x", "d_y", "level", "s", "failures", "er_hat", "er_check")

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=self.COLUMNS, lineterminator="\n", extrasaction="ignore")
            writer.writeheader()
            for row in self.rows:
                writer.writerow({k: "" if row.get(k) is None else row.get(k) for k in self.COLUMNS})
        return path

    def to_json(self) -> str:
        return json.dumps({"rows": self.rows}, indent=2)

    def format(self) -> str:
        lines = [f"{'cell':<48} {'h':>2} {'er_hat':>7} {'er_check':>8}"]
        for row in self.rows:
            lines.append(f"{row['cell']:<48} {row['level']:>2} {row['er_hat']:>7.2f} {row['er_check']:>8.2f}")
        return "\n".join(lines)


def error_rate(records: list[dict], key: str) -> float:
    """Share of replications whose estimate misses the true value; failures count as misses."""
    misses = sum(1 for r in records if r["failed"] or r[key] != r["beta_true"])
    return misses / len(records)


def resolve_base_seed(cfg: ExperimentConfig) -> ExperimentConfig:
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None and env.strip():
        cfg.base_seed = int(env)
    return cfg


def _check_sizes(cfg: ExperimentConfig) -> None:
    for cell in cfg.cells():
        size = cell["n"] if cell["shape"] == "circles" else cell["n_spheres"] * cell["pts_per_sphere"]
        for h in cfg.levels:
            cap = cfg.max_points.get(h)
            if cap is not None and size > cap:
                raise ValueError(f"cell {cell_key(cell)} has {size} points, above the level-{h} cap of {cap}")


def run_experiment(cfg: ExperimentConfig) -> ErrorTable:
    """Run every design cell ``s`` times and tabulate the estimation error rates."""
    _check_sizes(cfg)
    cells = cfg.cells()
    tasks = [(ci, rep) for ci in range(len(cells)) for rep in range(cfg.s)]
    results = Parallel(n_jobs=cfg.n_jobs)(delayed(run_replication)(cells[ci], cfg, rep) for ci, rep in tasks)

    by_cell: dict[tuple[int, int], list[dict]] = {}
    for (ci, _), recs in zip(tasks, results):
        for rec in recs:
            by_cell.setdefault((ci, rec["level"]), []).append(rec)

    rows = []
    for ci, cell in enumerate(cells):
        for h in cfg.levels:
            recs = by_cell[(ci, h)]
            rows.append(
                {
                    "cell": cell_key(cell),
                    **{k: cell.get(k) for k in ("shape", "r", "n", "n_spheres", "pts_per_sphere", "sigma", "d_x", "d_y")},
                    "level": h,
                    "s": len(recs),
                    "failures": sum(r["failed"] for r in recs),
                    "er_hat": error_rate(recs, "beta_hat"),
                    "er_check": error_rate(recs, "beta_check"),
                }
            )
    table = ErrorTable(rows)

    if cfg.output_dir is not None:
        out = Path(cfg.output_dir)
        rep_dir = out / "replications"
        for (ci, rep), recs in zip(tasks, results):
            cdir = rep_dir / cell_key(cells[ci])
            cdir.mkdir(parents=True, exist_ok=True)
            for rec in recs:
                (cdir / f"level{rec['level']}_rep{rep:04d}.json").write_text(json.dumps(rec, indent=2) + "\n", encoding="utf-8")
        table.to_csv(out / "error_table.csv")
        (out / "error_table.json").write_text(table.to_json() + "\n", encoding="utf-8")
        (out / "config.json").write_text(json.dumps(cfg.to_dict(), indent=2) + "\n", encoding="utf-8")
    return table

"""Command line interface: ``bayes-betti <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from ._validation import resolve_eps_max
from .estimators import PosteriorSummary, summarize
from .experiment import SEED_ENV_VAR, ExperimentConfig, resolve_base_seed, run_experiment
from .homology import load_diagram_csv, rips_persistence, write_diagram_csv
from .lifetimes import extract_lifetimes, load_lifetimes_csv, write_lifetimes_csv
from .partition_model import NormalGammaParams
from .sampler import ChainConfig, ChainOutput, run_chain
from .synthgen import GeneratorConfig, generate, read_cloud_csv, write_cloud_csv

log = logging.getLogger("bayes_betti")


def _eps_arg(value: str):
    return value if value == "enclosing" else float(value)


def _write_json(obj, path) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def cmd_generate(args) -> None:
    cfg = GeneratorConfig(
        shape=args.shape,
        r=args.r,
        n=args.n,
        d_x=args.dx,
        d_y=args.dy,
        sigma=args.sigma,
        n_spheres=args.n_spheres,
        pts_per_sphere=args.pts_per_sphere,
        sphere_radius=args.sphere_radius,
        lattice_radius=args.lattice_radius,
        seed=args.seed,
    )
    cloud = generate(cfg)
    write_cloud_csv(cloud, args.output)
    log.info("wrote %d points to %s", len(cloud), args.output)


def cmd_diagram(args) -> None:
    cloud = read_cloud_csv(args.cloud)
    eps = resolve_eps_max(args.eps_max, cloud.points)
    diagram = rips_persistence(cloud.points, eps, args.max_dim)
    write_diagram_csv(diagram, args.output)
    log.info("diagram with eps_max=%.6g written to %s", eps, args.output)


def _load_sample(path: Path, level: int):
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().strip()
    if header == "lifetime":
        sample = load_lifetimes_csv(path)
        if sample.h != level:
            log.info("lifetime file is level %d; --level %d ignored", sample.h, level)
        return sample
    return extract_lifetimes(load_diagram_csv(path), level)


def cmd_fit(args) -> None:
    sample = _load_sample(Path(args.input), args.level)
    if args.lifetimes_out:
        write_lifetimes_csv(sample, args.lifetimes_out)
    cfg = ChainConfig(
        burn_in=args.burn_in,
        samples=args.samples,
        thin=args.thin,
        ng=NormalGammaParams(args.m, args.c, args.a, args.b),
        theta_prior=(args.theta_alpha, args.theta_beta),
        theta_init=args.theta_init,
        seed=args.seed,
        keep_trace=args.trace,
        shift_sweeps=args.shift_sweeps,
    )
    out = run_chain(sample.logs, cfg)
    doc = out.to_dict(include_trace=args.trace)
    doc["data"] = {
        "level": sample.h,
        "removed_at_max": sample.removed_at_max,
        "lifetimes": [float(v) for v in sample.lifetimes],
    }
    _write_json(doc, args.output)
    log.info("chain on %d lifetimes, acceptance %.3f", out.n, out.acceptance_rate)


def cmd_estimate(args) -> None:
    doc = json.loads(Path(args.chain).read_text(encoding="utf-8"))
    if "data" not in doc or "config" not in doc:
        raise ValueError(f"{args.chain}: not a chain output written by 'fit'")
    out = ChainOutput.from_dict(doc)
    y = np.log(np.asarray(doc["data"]["lifetimes"], dtype=float))
    summary = summarize(
        out,
        y,
        out.config.ng,
        int(doc["data"]["level"]),
        int(doc["data"]["removed_at_max"]),
        p0=args.p0,
        tau_overlap=args.tau_overlap,
    )
    _write_json(summary.to_dict(), args.output)


def cmd_experiment(args) -> None:
    doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
    cfg = ExperimentConfig.from_dict(doc)
    if args.output_dir:
        cfg.output_dir = args.output_dir
    if args.n_jobs is not None:
        cfg.n_jobs = args.n_jobs
    cfg = resolve_base_seed(cfg)
    table = run_experiment(cfg)
    print(table.format())


def cmd_report(args) -> None:
    rows = []
    for path in args.summaries:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        summary = PosteriorSummary.from_dict(doc.get("summary", doc))
        for i, p in summary.S.items():
            rows.append((str(path), summary.level, i, p))
    fh = sys.stdout if args.output in (None, "-") else open(args.output, "w", newline="", encoding="utf-8")
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["source", "level", "i", "S_i"])
        for src, level, i, p in rows:
            writer.writerow([src, level, i, f"{p:.6g}"])
    finally:
        if fh is not sys.stdout:
            fh.close()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bayes-betti",
        description="Bayesian Betti number estimation from Vietoris-Rips lifetimes.",
        epilog=f"The experiment base seed can be overridden with the {SEED_ENV_VAR} environment variable.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic point cloud CSV")
    p.add_argument("--shape", choices=["circles", "fibonacci_spheres"], default="circles")
    p.add_argument("--r", type=int, default=1, help="number of circles")
    p.add_argument("--n", type=int, default=600, help="number of points (circles)")
    p.add_argument("--dx", type=float, default=5.0)
    p.add_argument("--dy", type=float, default=5.0)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--n-spheres", type=int, default=30)
    p.add_argument("--pts-per-sphere", type=int, default=50)
    p.add_argument("--sphere-radius", type=float, default=1.0)
    p.add_argument("--lattice-radius", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("diagram", help="point cloud CSV -> persistence diagram CSV")
    p.add_argument("cloud")
    p.add_argument("--eps-max", type=_eps_arg, default="enclosing")
    p.add_argument("--max-dim", type=int, default=1, choices=[1, 2, 3])
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_diagram)

    p = sub.add_parser("fit", help="diagram or lifetime CSV -> chain output JSON")
    p.add_argument("input")
    p.add_argument("--level", type=int, default=0)
    p.add_argument("--burn-in", type=int, default=10_000)
    p.add_argument("--samples", type=int, default=5_000)
    p.add_argument("--thin", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--m", type=float, default=0.0)
    p.add_argument("--c", type=float, default=0.5)
    p.add_argument("--a", type=float, default=1.1)
    p.add_argument("--b", type=float, default=0.1)
    p.add_argument("--theta-alpha", type=float, default=1.1)
    p.add_argument("--theta-beta", type=float, default=0.1)
    p.add_argument("--theta-init", type=float, default=1.0)
    p.add_argument("--shift-sweeps", type=int, default=1)
    p.add_argument("--trace", action="store_true", help="include the theta trace")
    p.add_argument("--lifetimes-out", help="also write the extracted lifetimes CSV")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("estimate", help="chain output JSON -> posterior summary JSON")
    p.add_argument("chain")
    p.add_argument("--p0", type=float, default=0.3)
    p.add_argument("--tau-overlap", type=float, default=0.03)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("experiment", help="run a replicated design from a JSON config")
    p.add_argument("config")
    p.add_argument("--output-dir")
    p.add_argument("--n-jobs", type=int)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("report", help="summaries -> per-lifetime S_i table")
    p.add_argument("summaries", nargs="+")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        args.func(args)
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"bayes-betti {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

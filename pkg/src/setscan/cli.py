"""Command-line interface: ``setscan <subcommand>``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, NumericalError
from .geometry import PointCloud, read_csv, write_csv

log = logging.getLogger("setscan")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def write_report(path: str | Path | None, payload: dict) -> None:
    text = json.dumps(_jsonable(payload), indent=2)
    if path is None:
        print(text)
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text + "\n")


def load_cloud(path: str) -> PointCloud:
    if not Path(path).exists():
        raise ConfigError(f"input file not found: {path}")
    return PointCloud(read_csv(path))


def cmd_sample(args) -> dict:
    from .samplers import sample_shape

    cloud = sample_shape(args.shape, args.n, d=args.d, A=args.A, R1=args.R1, seed=args.seed)
    write_csv(args.output, cloud.points, header=[f"x{k}" for k in range(cloud.dim)])
    return {"shape": args.shape, "n": cloud.n, "d": cloud.dim, "seed": args.seed,
            "output": args.output}


def cmd_detect_dim(args) -> dict:
    from .offset import data_driven_radius, detect_full_dimension, theoretical_radius

    cloud = load_cloud(args.input)
    if args.radius is not None:
        r = args.radius
    elif args.kappa is not None:
        r = theoretical_radius(cloud.n, cloud.dim, args.kappa)
    else:
        r = data_driven_radius(cloud, args.beta)
    decision = detect_full_dimension(cloud, r)
    report = {"n": cloud.n, "d": cloud.dim, **decision.as_dict()}
    write_report(args.report, report)
    return report


def cmd_estimate_noise(args) -> dict:
    from .noise import estimate_noise

    cloud = load_cloud(args.input)
    est = estimate_noise(cloud, args.method, epsilon=args.epsilon, r=args.r)
    report = est.as_dict()
    write_report(args.report, report)
    return report


def parse_reference(text: str, dim: int):
    """``sphere:<c1>,...,<cd>:<radius>``, ``curve:<name>`` or ``polyline:<file.csv>``."""
    from .denoise import Polyline, Sphere
    from .samplers import CurveDescriptor

    kind, _, rest = text.partition(":")
    if kind == "sphere":
        center, _, radius = rest.rpartition(":")
        c = [float(v) for v in center.split(",")] if center else [0.0] * dim
        return Sphere(np.asarray(c), float(radius))
    if kind == "curve":
        return Polyline(CurveDescriptor.analytic(rest, 1e-3))
    if kind == "polyline":
        return Polyline(CurveDescriptor.polyline(read_csv(rest)))
    raise ConfigError(f"cannot parse reference {text!r}")


def cmd_denoise(args) -> dict:
    from .denoise import DenoiseConfig, denoise, hausdorff_distance

    cloud = load_cloud(args.input)
    config = DenoiseConfig(lam=args.lam, backend=args.backend, epsilon=args.epsilon, r=args.r,
                           R=args.R)
    result = denoise(cloud, config)
    write_csv(args.output, result.denoised, header=[f"x{k}" for k in range(cloud.dim)])
    report = {"n": cloud.n, "d": cloud.dim, "lambda": args.lam, **result.as_dict(),
              "output": args.output}
    if args.reference:
        ref = parse_reference(args.reference, cloud.dim)
        report["reference"] = args.reference
        report["hausdorff_to_reference"] = hausdorff_distance(result.denoised, ref)
    write_report(args.report, report)
    return report


def cmd_minkowski(args) -> dict:
    from .denoise import DenoiseConfig
    from .minkowski import minkowski_noiseless, minkowski_noisy

    cloud = load_cloud(args.input)
    region = "shell" if args.region == "shell" else None
    if args.noisy:
        config = DenoiseConfig(lam=args.lam, backend=args.backend, R=args.R1)
        est, result = minkowski_noisy(cloud, args.dprime, config, r=args.r, N=args.mc,
                                      seed=args.seed, region=region)
        report = {**est.as_dict(), "denoise": result.as_dict()}
    else:
        r = "auto" if args.r is None else args.r
        est = minkowski_noiseless(cloud, args.dprime, r, N=args.mc, seed=args.seed,
                                  region=region)
        report = est.as_dict()
    report.update({"n": cloud.n, "d": cloud.dim, "seed": args.seed, "noisy": args.noisy})
    write_report(args.report, report)
    return report


def cmd_experiment(args) -> dict:
    from .experiments import ExperimentSpec, run_experiment

    if args.spec:
        data = json.loads(Path(args.spec).read_text()) if Path(args.spec).exists() else None
        if data is None:
            raise ConfigError(f"spec file not found: {args.spec}")
    else:
        data = {"experiment": args.kind}
    if args.full:
        data["full"] = True
    if args.workers:
        data["workers"] = args.workers
    spec = ExperimentSpec.from_dict(data)
    report = run_experiment(spec, csv_dir=args.csv)
    write_report(args.out, report)
    return report


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="setscan", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"setscan {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", help="draw a seeded synthetic point cloud")
    s.add_argument("--shape", required=True,
                   choices=["sphere", "shell", "superellipse-tube", "trefoil-tube", "circle-tube"])
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--A", type=float, default=0.0, help="shell half-width")
    s.add_argument("--R1", type=float, default=0.3, help="tube radius for curve tubes")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--output", required=True)
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("detect-dim", help="decide whether the support has nonempty interior")
    s.add_argument("--input", required=True)
    s.add_argument("--beta", type=float, default=2.0)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--radius", type=float)
    g.add_argument("--kappa", type=float)
    s.add_argument("--report")
    s.set_defaults(func=cmd_detect_dim)

    s = sub.add_parser("estimate-noise", help="estimate the tube half-width R1")
    s.add_argument("--input", required=True)
    s.add_argument("--method", choices=["bb", "rconvex"], default="bb")
    s.add_argument("--epsilon", type=float)
    s.add_argument("--r", type=float)
    s.add_argument("--report")
    s.set_defaults(func=cmd_estimate_noise)

    s = sub.add_parser("denoise", help="partially denoise a tube sample")
    s.add_argument("--input", required=True)
    s.add_argument("--backend", choices=["bb", "rconvex"], default="bb")
    s.add_argument("--lambda", dest="lam", type=float, default=0.5)
    s.add_argument("--epsilon", type=float)
    s.add_argument("--r", type=float)
    s.add_argument("--R", type=float, help="known tube half-width (default: estimated)")
    s.add_argument("--reference",
                   help="sphere:<c1,...,cd>:<radius> | curve:<name> | polyline:<file.csv>")
    s.add_argument("--output", required=True)
    s.add_argument("--report")
    s.set_defaults(func=cmd_denoise)

    s = sub.add_parser("minkowski", help="estimate the d'-dimensional Minkowski content")
    s.add_argument("--input", required=True)
    s.add_argument("--dprime", type=int, required=True)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--r", type=float)
    g.add_argument("--auto", action="store_true", help="r = 0.5 sqrt(connectivity statistic)")
    s.add_argument("--noisy", action="store_true")
    s.add_argument("--R1", type=float, help="known tube half-width for the noisy pipeline")
    s.add_argument("--lambda", dest="lam", type=float, default=0.5)
    s.add_argument("--backend", choices=["bb", "rconvex"], default="bb")
    s.add_argument("--region", choices=["box", "shell"], default="box",
                   help="Monte Carlo region: inflated bounding box, or 1-2r <= |x| <= 1+2r")
    s.add_argument("--mc", type=int, default=10**5)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--report")
    s.set_defaults(func=cmd_minkowski)

    s = sub.add_parser("experiment", help="run a simulation study")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--spec", help="experiment spec JSON")
    g.add_argument("--kind", choices=["table1", "figure4", "table3"],
                   help="run a study with its default grid")
    s.add_argument("--out", required=True)
    s.add_argument("--csv", help="directory for CSV output")
    s.add_argument("--full", action="store_true", help="full-scale grid (hours)")
    s.add_argument("--workers", type=int)
    s.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    warnings.simplefilter("default")
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"setscan: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"setscan: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

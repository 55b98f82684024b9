"""Simulation harness for the detection, denoising and Minkowski studies.

All randomness comes from one master seed through named substreams
(experiment / cell / replication), so a report is reproducible from its
spec alone and replications may run in any order or in parallel.
"""

from __future__ import annotations

import json
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .denoise import DenoiseConfig, denoise
from .errors import ConfigError
from .minkowski import ShellRegion, minkowski_noiseless, minkowski_noisy, table2_radius
from .offset import data_driven_radius, detect_full_dimension
from .samplers import sample_shell, sample_sphere, substream, unit_sphere_area

SIZE_LADDER = (50, 100, 200, 300, 400, 500, 1000, 2000, 5000, 10000)
KINDS = ("table1", "figure4", "table3", "custom")

DEFAULTS = {
    "table1": {
        "reduced": {"replications": 50, "threshold": 47, "n_max": 2000,
                    "grid": [{"d": d, "A": A} for d in (2, 3) for A in (0.0, 0.01, 0.05, 0.1)]},
        "full": {"replications": 200, "threshold": 190, "n_max": 10000,
                 "grid": [{"d": d, "A": A} for d in (2, 3, 4)
                          for A in (0.0, 0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5)]},
    },
    "figure4": {
        "reduced": {"replications": 10, "grid": [{"d": 2, "R1": 0.3}],
                    "n_values": [100, 1000, 10000], "m": 100},
        "full": {"replications": 10, "grid": [{"d": 2, "R1": 0.3}, {"d": 3, "R1": 0.3}],
                 "n_values": [100, 1000, 10000], "m": 100},
    },
    "table3": {
        "reduced": {"replications": 20, "mc_points": 10**5,
                    "grid": [{"d": d, "R1": R1, "n": n} for d in (2, 3) for R1 in (0.0, 0.2)
                             for n in (10**3, 10**4)]},
        "full": {"replications": 100, "mc_points": 10**5,
                 "grid": [{"d": d, "R1": R1, "n": n} for d in (2, 3, 4) for R1 in (0.0, 0.2)
                          for n in (10**3, 10**4, 10**5, 10**6)]},
    },
}


def load_schema() -> dict:
    return json.loads(resources.files("setscan").joinpath("experiment_schema.json").read_text())


@dataclass
class ExperimentSpec:
    experiment: str
    grid: list = field(default_factory=list)
    replications: int = 1
    threshold: int | None = None
    seed: int = 0
    n_max: int | None = None
    n_values: list | None = None
    m: int = 100
    mc_points: int = 10**5
    lam: float = 0.5
    backend: str = "bb"
    beta: float = 2.0
    workers: int = 1
    full: bool = False
    base: str | None = None

    def __post_init__(self):
        if self.experiment not in KINDS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {KINDS}")
        if self.experiment == "custom" and self.base not in KINDS[:3]:
            raise ConfigError("a custom experiment needs 'base' set to table1, figure4 or table3")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if self.threshold is not None and not 0 <= self.threshold <= self.replications:
            raise ConfigError(
                f"threshold {self.threshold} must lie in [0, replications={self.replications}]"
            )
        if not self.grid:
            raise ConfigError("experiment grid is empty")

    @property
    def kind(self) -> str:
        return self.base if self.experiment == "custom" else self.experiment

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        try:
            jsonschema.validate(data, load_schema())
        except jsonschema.ValidationError as exc:
            raise ConfigError(f"invalid experiment spec: {exc.message}") from exc
        data = dict(data)
        kind = data["experiment"] if data["experiment"] != "custom" else data.get("base")
        preset = DEFAULTS.get(kind, {}).get("full" if data.get("full") else "reduced", {})
        merged = {**preset, **data}
        merged.setdefault("threshold", None)
        return cls(**merged)

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentSpec":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
        return cls.from_dict(data)

    def as_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


def _map(func, items, workers: int):
    items = list(items)
    if workers <= 1 or len(items) < 2:
        return [func(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def ladder(n_max: int | None = None, n_values=None) -> list[int]:
    if n_values is not None:
        ns = [int(n) for n in n_values]
        if ns != list(SIZE_LADDER[:len(ns)]):
            raise ConfigError(f"sample-size ladder must be a prefix of {SIZE_LADDER}")
        return ns
    top = SIZE_LADDER[-1] if n_max is None else n_max
    ns = [n for n in SIZE_LADDER if n <= top]
    if not ns:
        raise ConfigError(f"n_max={n_max} is below the smallest sample size {SIZE_LADDER[0]}")
    return ns


def bracket(n_min: int | None, ns: list[int]) -> str:
    if n_min is None:
        return f"> {ns[-1]}"
    k = ns.index(n_min)
    return f"<= {n_min}" if k == 0 else f"[{ns[k - 1] + 1}, {n_min}]"


def bracket_index(label: str) -> int:
    """Position of a bracket on the sample-size ladder (len(ladder) for '> max')."""
    label = label.replace("≤", "<=").strip()
    if label.startswith(">"):
        top = int(label[1:].strip())
        return SIZE_LADDER.index(top) + 1
    if label.startswith("<="):
        return SIZE_LADDER.index(int(label[2:].strip()))
    return SIZE_LADDER.index(int(label.strip("[]").split(",")[1]))


# --- table 1 -----------------------------------------------------------------

def _detect_once(args) -> bool:
    seed, tag, d, A, n, beta, rep = args
    rng = np.random.default_rng(substream(seed, tag, f"d={d}", f"A={A!r}", n, rep))
    cloud = sample_shell(n, d, A, rng)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        r = data_driven_radius(cloud, beta)
    decision = detect_full_dimension(cloud, r)
    return decision.full_dimensional == (A > 0)


def run_table1(spec: ExperimentSpec) -> dict:
    threshold = spec.threshold if spec.threshold is not None else spec.replications
    ns = ladder(spec.n_max, spec.n_values)
    cells = []
    for cell in spec.grid:
        d, A = int(cell["d"]), float(cell["A"])
        t0 = time.perf_counter()
        counts, n_min = {}, None
        for n in ns:
            jobs = [(spec.seed, "table1", d, A, n, spec.beta, rep)
                    for rep in range(spec.replications)]
            correct = sum(_map(_detect_once, jobs, spec.workers))
            counts[str(n)] = correct
            if correct >= threshold:
                n_min = n
                break
        cells.append({
            "d": d, "A": A, "correct_counts": counts, "min_n": n_min,
            "bracket": bracket(n_min, ns), "runtime_s": time.perf_counter() - t0,
        })
    return _report(spec, cells, threshold=threshold, ladder=ns)


# --- figure 4 ----------------------------------------------------------------

E_BINS = np.linspace(-0.3, 0.3, 31)


def _figure4_once(args):
    seed, d, R1, n, m, lam, backend, rep = args
    values, draw = [], 0
    # pool independent samples of size n until m denoised values are collected
    while len(values) < m:
        rng = np.random.default_rng(substream(seed, "figure4", f"d={d}", n, rep, draw))
        cloud = sample_shell(n, d, R1, rng)
        result = denoise(cloud, DenoiseConfig(lam=lam, backend=backend))
        values.extend(np.linalg.norm(result.denoised, axis=1) - 1.0)
        draw += 1
        if draw > 100 * m:  # pragma: no cover - denoising never selects anything
            raise ConfigError("denoising selects no points at this sample size")
    denoised = np.asarray(values[:m])
    rng = np.random.default_rng(substream(seed, "figure4-raw", f"d={d}", rep))
    raw = np.linalg.norm(sample_shell(m, d, R1, rng).points, axis=1) - 1.0
    return denoised, raw, draw


def run_figure4(spec: ExperimentSpec, csv_dir: str | Path | None = None) -> dict:
    ns = spec.n_values or [100, 1000, 10000]
    cells, rows = [], []
    for cell in spec.grid:
        d, R1 = int(cell["d"]), float(cell.get("R1", 0.3))
        raw_added = False
        for n in ns:
            t0 = time.perf_counter()
            jobs = [(spec.seed, d, R1, int(n), spec.m, spec.lam, spec.backend, rep)
                    for rep in range(spec.replications)]
            out = _map(_figure4_once, jobs, spec.workers)
            sds = [float(np.std(den, ddof=1)) for den, _, _ in out]
            all_e = np.concatenate([den for den, _, _ in out])
            for rep, (den, raw, _) in enumerate(out):
                rows.extend((d, int(n), rep, "denoised", float(e)) for e in den)
                if not raw_added:
                    rows.extend((d, 100, rep, "raw", float(e)) for e in raw)
            raw_e = np.concatenate([raw for _, raw, _ in out])
            if not raw_added:
                cells.append({
                    "d": d, "R1": R1, "kind": "raw", "n": spec.m,
                    "histogram": np.histogram(raw_e, E_BINS)[0].tolist(),
                    "median_sd": float(np.median([np.std(r, ddof=1) for _, r, _ in out])),
                    "e_min": float(raw_e.min()), "e_max": float(raw_e.max()),
                })
                raw_added = True
            cells.append({
                "d": d, "R1": R1, "kind": "denoised", "n": int(n), "m": spec.m,
                "samples_pooled": [int(k) for _, _, k in out],
                "median_sd": float(np.median(sds)),
                "frac_within_0.05": float(np.mean(np.abs(all_e) <= 0.05)),
                "histogram": np.histogram(all_e, E_BINS)[0].tolist(),
                "runtime_s": time.perf_counter() - t0,
            })
    report = _report(spec, cells, bins=E_BINS.tolist())
    if csv_dir is not None:
        path = Path(csv_dir) / "figure4_e_values.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as fh:
            fh.write("d,n,replication,kind,e\n")
            for row in rows:
                fh.write(",".join(map(str, row[:4])) + f",{row[4]!r}\n")
        report["csv"] = str(path)
    return report


# --- table 3 -----------------------------------------------------------------

def sphere_content(d: int) -> float:
    """(d-1)-dimensional content of the unit sphere in R^d: 2pi, 4pi, 2pi^2 for d = 2, 3, 4."""
    return unit_sphere_area(d)


def _table3_once(args) -> float:
    seed, d, R1, n, N, lam, backend, rep = args
    ss = substream(seed, "table3", f"d={d}", f"R1={R1!r}", n, rep)
    sample_ss, mc_ss = ss.spawn(2)
    rng = np.random.default_rng(sample_ss)
    if R1 == 0:
        cloud = sample_sphere(n, d, rng)
        est = minkowski_noiseless(cloud, d - 1, "auto", N=N, seed=mc_ss, region="shell")
    else:
        cloud = sample_shell(n, d, R1, rng)
        r = table2_radius(n, d)
        est, _ = minkowski_noisy(cloud, d - 1, DenoiseConfig(lam=lam, backend=backend), r=r,
                                 N=N, seed=mc_ss, region=ShellRegion.around_unit_sphere(r, d))
    return est.value


def run_table3(spec: ExperimentSpec) -> dict:
    cells = []
    for cell in spec.grid:
        d, R1, n = int(cell["d"]), float(cell["R1"]), int(cell["n"])
        t0 = time.perf_counter()
        truth = sphere_content(d)
        jobs = [(spec.seed, d, R1, n, spec.mc_points, spec.lam, spec.backend, rep)
                for rep in range(spec.replications)]
        values = np.asarray(_map(_table3_once, jobs, spec.workers))
        err = math.sqrt(float(np.mean((values - truth) ** 2))) / truth
        cells.append({
            "d": d, "R1": R1, "n": n, "truth": truth, "replications": spec.replications,
            "radius": "auto" if R1 == 0 else table2_radius(n, d),
            "mean_estimate": float(values.mean()), "rel_error_pct": 100 * err,
            "estimates": values.tolist(), "runtime_s": time.perf_counter() - t0,
        })
    return _report(spec, cells)


# --- common ------------------------------------------------------------------

def _report(spec: ExperimentSpec, cells: list, **extra) -> dict:
    return {
        "experiment": spec.experiment,
        "kind": spec.kind,
        "version": __version__,
        "seed": spec.seed,
        "config": spec.as_dict(),
        "cells": cells,
        **extra,
        "total_runtime_s": sum(c.get("runtime_s", 0.0) for c in cells),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }


RUNNERS = {"table1": run_table1, "figure4": run_figure4, "table3": run_table3}


def run_experiment(spec: ExperimentSpec, csv_dir: str | Path | None = None) -> dict:
    if spec.kind == "figure4":
        return run_figure4(spec, csv_dir)
    report = RUNNERS[spec.kind](spec)
    if csv_dir is not None:
        report["csv"] = str(_cells_csv(report, Path(csv_dir)))
    return report


def _cells_csv(report: dict, out_dir: Path) -> Path:
    path = out_dir / f"{report['kind']}_cells.csv"
    keys = [k for k, v in report["cells"][0].items() if not isinstance(v, (list, dict))]
    rows = [[c.get(k) for k in keys] for c in report["cells"]]
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(",".join(keys) + "\n")
        for row in rows:
            fh.write(",".join("" if v is None else str(v) for v in row) + "\n")
    return path


def strip_volatile(report: dict) -> dict:
    """Copy of a report without timestamps and runtimes (for reproducibility checks)."""
    if isinstance(report, dict):
        return {k: strip_volatile(v) for k, v in report.items()
                if k not in ("timestamp", "total_runtime_s", "runtime_s")}
    if isinstance(report, list):
        return [strip_volatile(v) for v in report]
    return report


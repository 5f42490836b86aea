"""Reproduction harness: threshold sweep, category-subset robustness,
and runtime benchmarking against two internal baselines.

Every individual run gets a derived seed (cfg.seed + 100003 * cell_index +
repeat_index), each run is persisted as one JSONL record, and aggregate cells
are recomputed from those records so a report can always be re-derived from
what was written to disk. Repeats could run concurrently; records are keyed
by run index so aggregation does not depend on completion order.
"""

from __future__ import annotations

import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .errors import LabelsRequired, NotEnoughCategories
from .factor import fit, run_osc
from .kmeans import KMeansConfig, kmeans, write_objective_trace
from .matrix import DataMatrix, standardize, validate as validate_matrix
from .metrics import evaluate

SEED_STRIDE = 100003

BASELINE_NAMES = ("raw-kmeans", "pca-kmeans")


@dataclass(frozen=True)
class ExperimentConfig:
    """Shared protocol knobs for the three studies."""

    k: int
    theta0: float = 0.85
    theta_grid: tuple = (0.70, 0.75, 0.80, 0.85, 0.90)
    repeats: int = 20
    subset_category_counts: tuple = (2, 4, 7, 15, 30)
    seed: int = 0
    restarts: int = 10
    max_iter: int = 300
    tol: float = 1e-6
    baselines: tuple = BASELINE_NAMES
    dataset: str = ""

    def __post_init__(self):
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if any(not (0.0 < t <= 1.0) for t in self.theta_grid):
            raise ValueError("theta_grid values must be in (0, 1]")
        if any(b not in BASELINE_NAMES for b in self.baselines):
            raise ValueError(f"baselines must be among {BASELINE_NAMES}")

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("theta_grid", "subset_category_counts", "baselines"):
            d[key] = list(d[key])
        return d


@dataclass(frozen=True)
class RunRecord:
    """One clustering run; the unit persisted to per-run.jsonl."""

    run_id: str
    setting: dict
    seed: int
    metrics: dict
    m: int | None
    timings_ms: dict
    objective_trace: tuple

    def to_dict(self) -> dict:
        d = asdict(self)
        d["objective_trace"] = list(self.objective_trace)
        return d


@dataclass
class ExperimentReport:
    """Aggregated cells plus the raw per-run records they derive from."""

    kind: str
    config: dict
    environment: dict
    cells: list = field(default_factory=list)
    runs: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "config": self.config,
            "environment": self.environment,
            "cells": self.cells,
        }

    def write(self, out_dir) -> None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")
        with open(os.path.join(out_dir, "per-run.jsonl"), "w", encoding="utf-8") as fh:
            for rec in self.runs:
                fh.write(json.dumps(rec.to_dict()) + "\n")
        for rec in self.runs:
            if len(rec.objective_trace):
                write_objective_trace(
                    os.path.join(out_dir, f"trace-{rec.run_id}.csv"),
                    rec.objective_trace,
                )
        self._write_table(os.path.join(out_dir, "table.csv"))

    def _write_table(self, path) -> None:
        if not self.cells:
            return
        keys = list(self.cells[0].keys())
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(",".join(keys) + "\n")
            for cell in self.cells:
                fh.write(",".join(str(cell.get(k, "")) for k in keys) + "\n")


def environment_fingerprint() -> dict:
    try:
        threads = len(os.sched_getaffinity(0))
    except AttributeError:
        threads = os.cpu_count() or 1
    return {
        "threads": threads,
        "build": f"oscluster-{__version__}/numpy-{np.__version__}",
        "python": ".".join(str(v) for v in sys.version_info[:3]),
    }


def sweep_theta(data: DataMatrix, cfg: ExperimentConfig) -> ExperimentReport:
    """Mean/SD of ACC, NMI, ARI and the selected dimension per threshold."""
    _require_labels(data)
    report = _new_report("sweep_theta", cfg)
    for ci, theta0 in enumerate(cfg.theta_grid):
        records = []
        for rep in range(cfg.repeats):
            seed = _derived_seed(cfg.seed, ci, rep)
            osc = run_osc(data, theta0, cfg.k, _kmeans_cfg(cfg, seed))
            rec = RunRecord(
                run_id=f"theta{theta0:.2f}-rep{rep:02d}",
                setting={"theta0": theta0, "repeat": rep},
                seed=seed,
                metrics=_metric_dict(osc.metrics),
                m=osc.m,
                timings_ms=dict(osc.timings_ms),
                objective_trace=tuple(float(v) for v in osc.clustering.objective_trace),
            )
            records.append(rec)
        report.runs.extend(records)
        cell = {"theta0": theta0, "m": records[0].m}
        cell.update(aggregate_metrics(records))
        report.cells.append(cell)
    return report


def subset_robustness(data: DataMatrix, cfg: ExperimentConfig) -> ExperimentReport:
    """Cluster category subsets of growing size, k = number of categories.

    Each repeat samples that many distinct label classes uniformly (derived
    seed) and keeps every sample of the chosen classes.
    """
    _require_labels(data)
    classes = np.unique(data.labels)
    if classes.size < max(cfg.subset_category_counts):
        raise NotEnoughCategories(
            f"dataset has {classes.size} categories, need {max(cfg.subset_category_counts)}"
        )
    report = _new_report("subset_robustness", cfg)
    for ci, n_cat in enumerate(cfg.subset_category_counts):
        records = []
        for rep in range(cfg.repeats):
            seed = _derived_seed(cfg.seed, ci, rep)
            picker = np.random.default_rng([cfg.seed, ci, rep])
            chosen = picker.choice(classes, size=n_cat, replace=False)
            mask = np.isin(data.labels, chosen)
            subset = validate_matrix(
                data.values[mask], labels=data.labels[mask],
                name=f"{data.name}-subset{n_cat}",
            )
            osc = run_osc(subset, cfg.theta0, int(n_cat), _kmeans_cfg(cfg, seed))
            records.append(RunRecord(
                run_id=f"cats{n_cat:02d}-rep{rep:02d}",
                setting={"categories": int(n_cat), "repeat": rep,
                         "classes": [int(c) for c in np.sort(chosen)]},
                seed=seed,
                metrics=_metric_dict(osc.metrics),
                m=osc.m,
                timings_ms=dict(osc.timings_ms),
                objective_trace=tuple(float(v) for v in osc.clustering.objective_trace),
            ))
        report.runs.extend(records)
        cell = {"categories": int(n_cat), "k": int(n_cat)}
        cell.update(aggregate_metrics(records))
        report.cells.append(cell)
    return report


def bench_runtime(data: DataMatrix, cfg: ExperimentConfig) -> ExperimentReport:
    """Wall-clock comparison of the pipeline against the enabled baselines.

    raw-kmeans clusters the raw rows; pca-kmeans clusters the top-m
    feature-space principal components with the same m the pipeline selects.
    """
    report = _new_report("bench_runtime", cfg)
    methods = ("osc",) + tuple(cfg.baselines)
    shared_m = None
    for ci, method in enumerate(methods):
        records = []
        for rep in range(cfg.repeats):
            seed = _derived_seed(cfg.seed, ci, rep)
            if method == "osc":
                osc = run_osc(data, cfg.theta0, cfg.k, _kmeans_cfg(cfg, seed))
                shared_m = osc.m
                rec = RunRecord(
                    run_id=f"osc-rep{rep:02d}",
                    setting={"method": "osc", "repeat": rep},
                    seed=seed,
                    metrics=_metric_dict(osc.metrics),
                    m=osc.m,
                    timings_ms=dict(osc.timings_ms),
                    objective_trace=tuple(float(v) for v in osc.clustering.objective_trace),
                )
            else:
                if shared_m is None:
                    shared_m = fit(standardize(data), cfg.theta0).m
                rec = _run_baseline(data, method, shared_m, cfg, seed, rep)
            records.append(rec)
        report.runs.extend(records)
        cell = {"method": method, "m": records[0].m}
        cell.update(aggregate_metrics(records))
        cell.update(_aggregate_timings(records))
        report.cells.append(cell)
    return report


def aggregate_metrics(records) -> dict:
    """Mean and population SD per metric; recomputable from the records."""
    out = {}
    names = sorted({k for rec in records for k in rec.metrics})
    for name in names:
        vals = np.array([rec.metrics[name] for rec in sorted(records, key=lambda r: r.run_id)])
        out[f"{name}_mean"] = float(vals.mean())
        out[f"{name}_sd"] = float(vals.std())
    wall = np.array([rec.timings_ms["total_ms"] for rec in records])
    out["wall_ms_mean"] = float(wall.mean())
    return out


def _aggregate_timings(records) -> dict:
    out = {}
    keys = sorted({k for rec in records for k in rec.timings_ms})
    for key in keys:
        vals = [rec.timings_ms.get(key) for rec in records]
        vals = [v for v in vals if v is not None]
        out[f"{key}_mean"] = float(np.mean(vals))
    return out


def _run_baseline(data, method, m, cfg, seed, rep) -> RunRecord:
    km_cfg = _kmeans_cfg(cfg, seed)
    t_all = time.perf_counter()
    if method == "raw-kmeans":
        points = data.values
        prep_ms = 0.0
    else:  # pca-kmeans
        t0 = time.perf_counter()
        centered = data.values - data.values.mean(axis=0)[None, :]
        u, s, _ = np.linalg.svd(centered, full_matrices=False)
        points = u[:, :m] * s[:m][None, :]
        prep_ms = (time.perf_counter() - t0) * 1e3
    t0 = time.perf_counter()
    result = kmeans(points, km_cfg)
    km_ms = (time.perf_counter() - t0) * 1e3
    total_ms = (time.perf_counter() - t_all) * 1e3
    metrics = {}
    if data.labels is not None:
        metrics = _metric_dict(evaluate(data.labels, result.assignments))
    return RunRecord(
        run_id=f"{method}-rep{rep:02d}",
        setting={"method": method, "repeat": rep},
        seed=seed,
        metrics=metrics,
        m=m if method == "pca-kmeans" else None,
        timings_ms={"prep_ms": prep_ms, "kmeans_ms": km_ms, "total_ms": total_ms},
        objective_trace=tuple(float(v) for v in result.objective_trace),
    )


def _kmeans_cfg(cfg: ExperimentConfig, seed: int) -> KMeansConfig:
    return KMeansConfig(
        k=cfg.k, max_iter=cfg.max_iter, tol=cfg.tol, restarts=cfg.restarts, seed=seed
    )


def _derived_seed(base: int, cell_index: int, repeat: int) -> int:
    return base + SEED_STRIDE * cell_index + repeat


def _metric_dict(metrics) -> dict:
    if metrics is None:
        return {}
    return {"acc": metrics.acc, "nmi": metrics.nmi, "ari": metrics.ari}


def _require_labels(data: DataMatrix) -> None:
    if data.labels is None:
        raise LabelsRequired("this study needs ground-truth labels")


def _new_report(kind: str, cfg: ExperimentConfig) -> ExperimentReport:
    return ExperimentReport(
        kind=kind, config=cfg.to_dict(), environment=environment_fingerprint()
    )

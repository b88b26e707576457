"""Experiment orchestration: homophily sweeps, sensitivity grids, the
Rademacher bracket check, and eigensolver benchmarks.

Every run is driven by a config with a documented default for each key;
results land in CSV (UTF-8, header row, RFC-4180 quoting) plus a JSON
summary so downstream plotting never reruns anything.  A cell is one
(homophily, encoding, seed) triple.  Seeds are mixed with fixed offsets
per consumer (+0 graph, +1 features, +2 split, +3 model init) so a
single cell rerun from (config hash, seed) reproduces the sweep's row
bit for bit.  Cells run sequentially; benchmark rows own the process
while they time, which is the cheapest way to avoid co-tenancy noise.
"""

from __future__ import annotations

import csv
import hashlib
import json
import statistics
import time
import tracemalloc
from dataclasses import asdict, dataclass, field

import numpy as np

from .chebyshev import monic_cheb_basis
from .encodings import EncodingSpec
from .errors import ParameterError
from .graphs import (FeatureGenParams, Graph, gen_features, normalized_laplacian,
                     sbm_community_labels, sbm_from_homophily, sbm_generate)
from .learner import ClassifierConfig, split_nodes, train_node_classifier
from .spectral import (DENSE_CAP, canonicalize_kernel, extremal_eigs, full_eigh,
                       normalize_eigenvalues)


def _merge_defaults(raw: dict, defaults: dict, where: str) -> dict:
    unknown = sorted(set(raw) - set(defaults))
    if unknown:
        raise ParameterError(
            f"{where}: unknown keys {unknown}; valid keys are {sorted(defaults)}")
    merged = dict(defaults)
    merged.update(raw)
    return merged


@dataclass(frozen=True)
class ExperimentConfig:
    """One homophily sweep: SBM family, grids, classifier, seeds.

    Field defaults are the reduced grid meant for desk-scale runs; any
    subset may be overridden from a config file.  `config_hash` digests
    the resolved values, so a row stamped with it can be regenerated.
    """

    family: str = "sbm"
    n: int = 2000
    k: int = 2
    avg_degree: float = 10.0
    homophily_grid: tuple = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)
    encodings: tuple = ("nope", "lpe-fk:k=16", "llpe:M=64,d=32,l1=0.001")
    feature_mode: str = "binary"
    feature_dim: int = 10
    feature_mu: float = 0.05
    feature_sigma: float = 1.0
    arch: str = "mlp"
    hidden: int = 64
    lr: float = 0.01
    epochs: int = 500
    patience: int = 100
    weight_decay: float = 0.0
    optimizer: str = "adam"
    seeds: tuple = (0, 1, 2, 3, 4, 5, 6, 7, 8, 9)
    out: str = ""

    def __post_init__(self):
        if self.family != "sbm":
            raise ParameterError("sweeps need labeled graphs; only family='sbm'")
        for name in ("homophily_grid", "encodings", "seeds"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
            if not getattr(self, name):
                raise ParameterError(f"{name} must be nonempty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ParameterError("seeds must be distinct")
        for enc in self.encodings:
            EncodingSpec.parse(enc)
        self.classifier()
        self.feature_params()

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        defaults = {f: getattr(cls, f) for f in cls.__dataclass_fields__}
        return cls(**_merge_defaults(raw, defaults, "sweep config"))

    def classifier(self) -> ClassifierConfig:
        return ClassifierConfig(arch=self.arch, hidden=self.hidden, lr=self.lr,
                                epochs=self.epochs, patience=self.patience,
                                weight_decay=self.weight_decay,
                                optimizer=self.optimizer)

    def feature_params(self) -> FeatureGenParams:
        return FeatureGenParams(mode=self.feature_mode, dim=self.feature_dim,
                                mu=self.feature_mu, sigma=self.feature_sigma)

    @property
    def config_hash(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True, default=list)
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class SweepRow:
    h: float
    encoding: str
    seed: int
    test_accuracy: float | None
    val_accuracy: float | None
    best_epoch: int | None
    wall_time_s: float
    error: str = ""
    config_hash: str = ""


SWEEP_COLUMNS = ("h", "encoding", "seed", "test_accuracy", "val_accuracy",
                 "best_epoch", "wall_time_s", "error", "config_hash")


def _sweep_graph(config: ExperimentConfig, h: float, seed: int) -> Graph:
    params = sbm_from_homophily(n=config.n, k=config.k, h=h,
                                avg_degree=config.avg_degree)
    g = sbm_generate(params, seed=seed)
    labels = sbm_community_labels(config.n, config.k)
    feats = gen_features(labels, config.feature_params(), seed=seed + 1)
    return Graph(indptr=g.indptr, indices=g.indices, features=feats, labels=labels)


def _shared_spectrum(config: ExperimentConfig, graph: Graph):
    """One decomposition reused by every encoding in a (h, seed) cell.

    Dense graphs get the full spectrum; past the dense cap only the
    extremal pairs the configured encodings can consume are computed,
    and encodings that need more fail their own cells.
    """
    variants = [EncodingSpec.parse(e) for e in config.encodings]
    need = [s for s in variants if s.variant.startswith(("llpe", "lpe"))]
    if not need:
        return None
    lap = normalized_laplacian(graph)
    if graph.n <= DENSE_CAP:
        dec = full_eigh(lap)
    else:
        ks = [s.k for s in need if s.k is not None]
        if not ks:
            return None
        top = max(ks)
        dec = extremal_eigs(lap, k_small=top + 4, k_large=top)
    return canonicalize_kernel(dec, graph.degrees)


def run_cell(config: ExperimentConfig, h: float, encoding: str, seed: int,
             graph: Graph | None = None, spectrum=None) -> SweepRow:
    """Train one (h, encoding, seed) cell; failures become the row's tag."""
    start = time.monotonic()
    try:
        if graph is None:
            graph = _sweep_graph(config, h, seed)
            spectrum = _shared_spectrum(config, graph)
        split = split_nodes(config.n, seed=seed + 2)
        result = train_node_classifier(graph, EncodingSpec.parse(encoding), split,
                                       config.classifier(), seed=seed + 3,
                                       spectrum=spectrum)
        return SweepRow(h=h, encoding=encoding, seed=seed,
                        test_accuracy=result.test_accuracy,
                        val_accuracy=result.val_accuracy,
                        best_epoch=result.best_epoch,
                        wall_time_s=time.monotonic() - start,
                        config_hash=config.config_hash)
    except Exception as exc:  # noqa: BLE001 - a cell must not sink the sweep
        return SweepRow(h=h, encoding=encoding, seed=seed, test_accuracy=None,
                        val_accuracy=None, best_epoch=None,
                        wall_time_s=time.monotonic() - start,
                        error=f"{type(exc).__name__}: {exc}",
                        config_hash=config.config_hash)


def run_sweep(config: ExperimentConfig, progress=None):
    """All cells of the grid; returns (rows, summary) and writes both.

    The graph and its spectrum are built once per (h, seed) and shared
    across encodings.  Output files are `<out>.csv` and `<out>.json`
    when `out` is set.
    """
    rows = []
    for h in config.homophily_grid:
        for seed in config.seeds:
            try:
                graph = _sweep_graph(config, h, seed)
                spectrum = _shared_spectrum(config, graph)
            except Exception as exc:  # noqa: BLE001 - cell isolation again
                graph = spectrum = None
                tag = f"{type(exc).__name__}: {exc}"
                for encoding in config.encodings:
                    rows.append(SweepRow(h=h, encoding=encoding, seed=seed,
                                         test_accuracy=None, val_accuracy=None,
                                         best_epoch=None, wall_time_s=0.0,
                                         error=tag,
                                         config_hash=config.config_hash))
                continue
            for encoding in config.encodings:
                row = run_cell(config, h, encoding, seed, graph=graph,
                               spectrum=spectrum)
                rows.append(row)
                if progress is not None:
                    progress(row)
    summary = summarize_rows(rows, config.config_hash)
    if config.out:
        write_rows_csv(rows, SWEEP_COLUMNS, config.out + ".csv")
        with open(config.out + ".json", "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2)
    return rows, summary


def summarize_rows(rows, config_hash: str = "") -> dict:
    """Mean and population std of test accuracy per (h, encoding) cell."""
    cells: dict = {}
    for row in rows:
        key = (row.h, row.encoding)
        cells.setdefault(key, []).append(row)
    out = []
    for (h, encoding), group in sorted(cells.items(), key=lambda kv: (kv[0][0], kv[0][1])):
        accs = [r.test_accuracy for r in group if not r.error]
        out.append({
            "h": h,
            "encoding": encoding,
            "mean": float(np.mean(accs)) if accs else None,
            "std": float(np.std(accs)) if accs else None,
            "num_seeds": len(group),
            "num_errors": sum(1 for r in group if r.error),
        })
    return {"config_hash": config_hash, "cells": out}


def write_rows_csv(rows, columns, path: str) -> None:
    """Dataclass rows to CSV; None becomes the empty field."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            record = asdict(row)
            writer.writerow(["" if record[c] is None else record[c]
                             for c in columns])


# ---------------------------------------------------------------------------
# Rademacher complexity of the spectral-filter class
# ---------------------------------------------------------------------------

def rademacher_estimate(lambdas, radius: float, order: int,
                        num_sigma: int = 2000, seed: int = 0):
    """Monte Carlo Rademacher complexity of the coefficient ball.

    Filters with monic-Chebyshev coefficients in the l2 ball of the
    given radius have complexity exactly (radius/n) E_sigma ||sum_i
    sigma_i phi(lambda_i)||_2 with feature map phi = (T~_0 .. T~_order);
    the expectation is estimated over num_sigma sign draws.  Returns
    (estimate, lower, upper, mc_stderr) where the bounds are
    radius/sqrt(2n) and sqrt(2) radius/sqrt(n).  The constant T~_0 = 1
    column is what keeps every sample above the lower bound; without it
    spectra concentrated near lambda = 1 fall out of the bracket.

    `lambdas` are Laplacian eigenvalues in [0, 2]; they are shifted to
    [-1, 1] here.
    """
    lam = np.asarray(lambdas, dtype=np.float64).ravel()
    if lam.size == 0:
        raise ParameterError("need at least one eigenvalue")
    if radius < 0 or order < 1 or num_sigma < 1:
        raise ParameterError("need radius >= 0, order >= 1, num_sigma >= 1")
    n = lam.size
    if radius == 0.0:
        return 0.0, 0.0, 0.0, 0.0
    phi = monic_cheb_basis(normalize_eigenvalues(lam), order)
    rng = np.random.default_rng(seed)
    signs = rng.integers(0, 2, size=(num_sigma, n)) * 2.0 - 1.0
    norms = np.linalg.norm(signs @ phi, axis=1)
    estimate = radius / n * float(norms.mean())
    stderr = 0.0
    if num_sigma > 1:
        stderr = radius / n * float(norms.std(ddof=1)) / np.sqrt(num_sigma)
    lower = radius / np.sqrt(2.0 * n)
    upper = np.sqrt(2.0) * radius / np.sqrt(n)
    return estimate, lower, upper, stderr


# ---------------------------------------------------------------------------
# eigensolver benchmark
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BenchRow:
    n: int
    k: int
    seed: int
    wall_time_s: float | None
    peak_bytes: int | None
    error: str = ""


BENCH_COLUMNS = ("n", "k", "seed", "wall_time_s", "peak_bytes", "error")

BENCH_DEFAULTS = {
    "n_grid": [1000, 10_000],
    "k_grid": [8, 32],
    "avg_degree": 10.0,
    "h": 0.5,
    "seeds": [0],
    "repeats": 3,
    "out": "",
}


def bench_eigs(n_grid, k_grid, avg_degree: float = 10.0, seeds=(0,),
               repeats: int = 3, h: float = 0.5, out: str = "") -> list:
    """Time extremal_eigs(first k, last k) on SBM graphs over the grid.

    Wall time is the median of `repeats` runs on a monotonic clock;
    peak_bytes is the largest traced allocation peak across them.
    Rows where the solver fails carry the error instead of numbers.
    """
    rows = []
    for n in n_grid:
        for k in k_grid:
            for seed in seeds:
                params = sbm_from_homophily(n=n, k=2, h=h, avg_degree=avg_degree)
                lap = normalized_laplacian(sbm_generate(params, seed=seed))
                times, peak, error = [], 0, ""
                for _ in range(repeats):
                    tracemalloc.start()
                    start = time.monotonic()
                    try:
                        extremal_eigs(lap, k_small=k, k_large=k)
                        times.append(time.monotonic() - start)
                    except Exception as exc:  # noqa: BLE001 - row isolation
                        error = f"{type(exc).__name__}: {exc}"
                    finally:
                        peak = max(peak, tracemalloc.get_traced_memory()[1])
                        tracemalloc.stop()
                    if error:
                        break
                rows.append(BenchRow(
                    n=n, k=k, seed=seed,
                    wall_time_s=statistics.median(times) if times else None,
                    peak_bytes=peak if times else None, error=error))
    if out:
        write_rows_csv(rows, BENCH_COLUMNS, out + ".csv")
    return rows


# ---------------------------------------------------------------------------
# sensitivity grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SensitivityRow:
    sweep: str
    value: int
    h: float
    encoding: str
    seed: int
    test_accuracy: float | None
    val_accuracy: float | None
    best_epoch: int | None
    wall_time_s: float
    error: str = ""
    config_hash: str = ""


SENSITIVITY_COLUMNS = ("sweep", "value", "h", "encoding", "seed",
                       "test_accuracy", "val_accuracy", "best_epoch",
                       "wall_time_s", "error", "config_hash")

SENSITIVITY_DEFAULTS = {
    "n": 2000,
    "k": 2,
    "avg_degree": 10.0,
    "feature_mode": "binary",
    "feature_dim": 10,
    "feature_mu": 0.05,
    "feature_sigma": 1.0,
    "arch": "mlp",
    "hidden": 64,
    "lr": 0.01,
    "epochs": 500,
    "patience": 100,
    "weight_decay": 0.0,
    "optimizer": "adam",
    "seeds": [0, 1, 2],
    "m_grid": [8, 16, 25, 50, 64, 128, 256, 500],
    "m_homophily": 0.8,
    "k_grid": [8, 16, 32, 64, 128],
    "k_homophily": 0.8,
    "llpe_dim": 32,
    "llpe_l1": 0.001,
    "llpe_order": 64,
    "out": "",
}


def _dedupe(grid) -> list:
    return list(dict.fromkeys(grid))


def sensitivity_sweeps(raw_config: dict | None = None) -> list:
    """Accuracy vs filter order M and vs retained pairs k, one CSV.

    The M sweep varies the llpe order on a fixed graph; the k sweep
    varies the extremal window of llpe-large.  Duplicate grid entries
    collapse to one cell.  Rows reuse the sweep cell machinery, so each
    is regenerable from (config hash, seed).
    """
    cfg = _merge_defaults(raw_config or {}, SENSITIVITY_DEFAULTS,
                          "sensitivity config")
    rows = []
    for sweep, grid, h, template in (
            ("M", _dedupe(cfg["m_grid"]), cfg["m_homophily"],
             "llpe:M={v},d={d},l1={l1}"),
            ("k", _dedupe(cfg["k_grid"]), cfg["k_homophily"],
             "llpe-large:k={v},M={M},d={d},l1={l1}")):
        encodings = [template.format(v=v, d=cfg["llpe_dim"], l1=cfg["llpe_l1"],
                                     M=cfg["llpe_order"]) for v in grid]
        config = ExperimentConfig(
            n=cfg["n"], k=cfg["k"], avg_degree=cfg["avg_degree"],
            homophily_grid=(h,), encodings=tuple(encodings),
            feature_mode=cfg["feature_mode"], feature_dim=cfg["feature_dim"],
            feature_mu=cfg["feature_mu"], feature_sigma=cfg["feature_sigma"],
            arch=cfg["arch"], hidden=cfg["hidden"], lr=cfg["lr"],
            epochs=cfg["epochs"], patience=cfg["patience"],
            weight_decay=cfg["weight_decay"], optimizer=cfg["optimizer"],
            seeds=tuple(cfg["seeds"]))
        for seed in config.seeds:
            graph = _sweep_graph(config, h, seed)
            spectrum = _shared_spectrum(config, graph)
            for value, encoding in zip(grid, encodings):
                cell = run_cell(config, h, encoding, seed, graph=graph,
                                spectrum=spectrum)
                rows.append(SensitivityRow(
                    sweep=sweep, value=value, h=h, encoding=encoding, seed=seed,
                    test_accuracy=cell.test_accuracy,
                    val_accuracy=cell.val_accuracy, best_epoch=cell.best_epoch,
                    wall_time_s=cell.wall_time_s, error=cell.error,
                    config_hash=cell.config_hash))
    if cfg["out"]:
        write_rows_csv(rows, SENSITIVITY_COLUMNS, cfg["out"] + ".csv")
    return rows

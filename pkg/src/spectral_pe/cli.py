"""Command-line front end: one verb per experiment artifact.

    spectral-pe <subcommand> --config <path> [--seed N] [--out <path>]

The config is a single JSON file.  It may hold one section per
subcommand (keyed by the subcommand name) or just the flat key set for
the verb being run; every key has a default, so an empty or missing
config is valid.  --seed and --out override the config's seed and
output path; for grid verbs (sweep, bench, sensitivity) --seed narrows
the seed list to that one seed.

Exit codes: 0 success, 1 hard error, 2 finished with per-cell soft
failures recorded in the output rows.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .community import Partition, align_errors, spectral_partition
from .distances import SpectralKernel, spectral_distance_matrix
from .encodings import EncodingSpec, LlpeParams, build_encoding
from .errors import ParameterError, SpectralPEError
from .graph_io import load_graph, save_graph
from .graphs import (FeatureGenParams, Graph, PaParams, gen_features,
                     normalized_laplacian, pa_generate, sbm_community_labels,
                     sbm_from_homophily, sbm_generate)
from .harness import (BENCH_DEFAULTS, SENSITIVITY_DEFAULTS, SENSITIVITY_COLUMNS,
                      ExperimentConfig, _merge_defaults, bench_eigs,
                      rademacher_estimate, run_sweep, sensitivity_sweeps,
                      write_rows_csv)
from .learner import ClassifierConfig, split_nodes, train_node_classifier
from .spectral import (DENSE_CAP, canonicalize_kernel, extremal_eigs, full_eigh,
                       save_spectrum_csv)

# keys shared by every verb that needs a graph: load one from disk when
# "graph" is a path, otherwise generate from the family parameters
GRAPH_DEFAULTS = {
    "graph": "",
    "family": "sbm",
    "n": 2000,
    "k": 2,
    "h": 0.5,
    "avg_degree": 10.0,
    "m_edges": 4,
    "pa_compat": None,
    "pa_label_dist": None,
    "feature_mode": "none",
    "feature_dim": 10,
    "feature_mu": 0.05,
    "feature_sigma": 1.0,
    "seed": 0,
}

RADEMACHER_DEFAULTS = {
    "lambdas": "",
    "n": 500,
    "k": 2,
    "h": 0.5,
    "avg_degree": 10.0,
    "radius": 1.0,
    "order": 64,
    "num_sigma": 2000,
    "seed": 0,
    "out": "rademacher.json",
}


def _resolve_graph(cfg: dict) -> Graph:
    if cfg["graph"]:
        return load_graph(cfg["graph"])
    seed = cfg["seed"]
    if cfg["family"] == "sbm":
        params = sbm_from_homophily(n=cfg["n"], k=cfg["k"], h=cfg["h"],
                                    avg_degree=cfg["avg_degree"])
        g = sbm_generate(params, seed=seed)
        labels = sbm_community_labels(cfg["n"], cfg["k"])
    elif cfg["family"] == "pa":
        k = cfg["k"]
        compat = cfg["pa_compat"]
        if compat is None:
            compat = (np.full((k, k), 0.2) + 0.8 * np.eye(k)).tolist()
        dist = cfg["pa_label_dist"] or [1.0 / k] * k
        params = PaParams(n=cfg["n"], m_edges=cfg["m_edges"], k=k,
                          compat=tuple(map(tuple, compat)),
                          label_dist=tuple(dist))
        g = pa_generate(params, seed=seed)
        labels = g.labels
    else:
        raise ParameterError(f"unknown graph family {cfg['family']!r}")
    features = None
    if cfg["feature_mode"] != "none":
        fparams = FeatureGenParams(mode=cfg["feature_mode"], dim=cfg["feature_dim"],
                                   mu=cfg["feature_mu"], sigma=cfg["feature_sigma"])
        features = gen_features(labels, fparams, seed=seed + 1)
    return Graph(indptr=g.indptr, indices=g.indices, features=features,
                 labels=labels)


def _graph_spectrum(graph: Graph, cfg: dict):
    lap = normalized_laplacian(graph)
    if cfg.get("solver", "full") == "extremal" or graph.n > DENSE_CAP:
        dec = extremal_eigs(lap, k_small=cfg.get("k_small", 32),
                            k_large=cfg.get("k_large", 32))
    else:
        dec = full_eigh(lap)
    if cfg.get("canonical", True):
        dec = canonicalize_kernel(dec, graph.degrees)
    return dec


def _cmd_gen(cfg: dict) -> int:
    graph = _resolve_graph(cfg)
    save_graph(graph, cfg["out"])
    print(f"wrote {cfg['out']}: n={graph.n} m={graph.num_edges}")
    return 0


def _cmd_spectrum(cfg: dict) -> int:
    graph = _resolve_graph(cfg)
    dec = _graph_spectrum(graph, cfg)
    save_spectrum_csv(dec, cfg["out"])
    print(f"wrote {cfg['out']}: n={dec.n} pairs={dec.num_pairs} kind={dec.kind}")
    return 0


def _cmd_encode(cfg: dict) -> int:
    graph = _resolve_graph(cfg)
    spec = EncodingSpec.parse(cfg["encoding"])
    spectrum = None
    if spec.variant in ("llpe", "llpe-large", "lpe-fk", "lpe-flk", "lpe-full"):
        solver_cfg = dict(cfg)
        if spec.variant == "llpe-large" and graph.n > DENSE_CAP:
            solver_cfg.update(solver="extremal", k_small=spec.k, k_large=spec.k)
        spectrum = _graph_spectrum(graph, solver_cfg)
    params = None
    if spec.variant in ("llpe", "llpe-large"):
        params = (LlpeParams.load_csv(cfg["theta"]) if cfg["theta"]
                  else LlpeParams.init(spec.order, spec.dim, seed=cfg["seed"]))
    enc = build_encoding(spec, graph=graph, spectrum=spectrum, params=params)
    with open(cfg["out"], "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(f"pe{j}" for j in range(enc.matrix.shape[1])) + "\n")
        for row in enc.matrix:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")
    print(f"wrote {cfg['out']}: {enc.matrix.shape[0]}x{enc.matrix.shape[1]} "
          f"({spec.name})")
    return 0


def _cmd_distance(cfg: dict) -> int:
    graph = _resolve_graph(cfg)
    kernel = SpectralKernel(variant=cfg["kernel"], t=cfg["t"])
    dec = _graph_spectrum(graph, cfg)
    dist = spectral_distance_matrix(dec, kernel)
    dist.save_csv(cfg["out"])
    print(f"wrote {cfg['out']}: {graph.n}x{graph.n} {kernel.name}")
    return 0


def _cmd_community(cfg: dict) -> int:
    graph = _resolve_graph(cfg)
    solver_cfg = dict(cfg)
    if graph.n > DENSE_CAP:
        solver_cfg.update(k_small=cfg["k"] + 4, k_large=cfg["k"])
    dec = _graph_spectrum(graph, solver_cfg)
    part = spectral_partition(dec, cfg["selector"], cfg["k"],
                              method=cfg["method"], seed=cfg["seed"], graph=graph)
    with open(cfg["out"], "w", encoding="utf-8") as fh:
        for label in part.labels:
            fh.write(f"{int(label)}\n")
    report = {"k": part.k, "selector": cfg["selector"], "method": cfg["method"],
              "labels": cfg["out"]}
    if (graph.labels is not None and part.k <= 10
            and int(graph.labels.max()) + 1 == part.k):
        rec = align_errors(part, Partition(labels=graph.labels, k=part.k))
        report.update(accuracy=rec.accuracy, misclassified=rec.misclassified)
    print(json.dumps(report))
    return 0


def _cmd_train(cfg: dict) -> int:
    graph = _resolve_graph(cfg)
    config = ClassifierConfig(arch=cfg["arch"], hidden=cfg["hidden"], lr=cfg["lr"],
                              epochs=cfg["epochs"], patience=cfg["patience"],
                              weight_decay=cfg["weight_decay"],
                              optimizer=cfg["optimizer"])
    split = split_nodes(graph.n, fractions=tuple(cfg["split_fractions"]),
                        seed=cfg["seed"] + 2)
    result = train_node_classifier(graph, EncodingSpec.parse(cfg["encoding"]),
                                   split, config, seed=cfg["seed"] + 3)
    payload = {
        "test_accuracy": result.test_accuracy,
        "val_accuracy": result.val_accuracy,
        "best_epoch": result.best_epoch,
        "quintile_accuracy": [None if np.isnan(q) else float(q)
                              for q in result.quintile_accuracy],
    }
    if result.theta is not None:
        theta_path = cfg["out"].rsplit(".", 1)[0] + "_theta.csv"
        result.theta.save_csv(theta_path)
        payload["theta"] = theta_path
    with open(cfg["out"], "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
    print(f"wrote {cfg['out']}: test_accuracy={result.test_accuracy:.4f}")
    return 0


def _cmd_sweep(cfg: dict) -> int:
    config = ExperimentConfig.from_dict(cfg)
    rows, _ = run_sweep(config)
    failed = sum(1 for r in rows if r.error)
    print(f"wrote {config.out}.csv and {config.out}.json: {len(rows)} rows, "
          f"{failed} failed")
    return 2 if failed else 0


def _cmd_rademacher(cfg: dict) -> int:
    if cfg["lambdas"]:
        lam = np.loadtxt(cfg["lambdas"], delimiter=",", ndmin=1)
    else:
        params = sbm_from_homophily(n=cfg["n"], k=cfg["k"], h=cfg["h"],
                                    avg_degree=cfg["avg_degree"])
        graph = sbm_generate(params, seed=cfg["seed"])
        lam = full_eigh(normalized_laplacian(graph)).eigenvalues
    est, lo, hi, se = rademacher_estimate(lam, cfg["radius"], cfg["order"],
                                          num_sigma=cfg["num_sigma"],
                                          seed=cfg["seed"])
    payload = {"estimate": est, "lower": lo, "upper": hi, "mc_stderr": se,
               "num_eigenvalues": int(lam.size),
               "contained": bool(lo - 3 * se <= est <= hi + 3 * se)}
    with open(cfg["out"], "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
    print(json.dumps(payload))
    return 0


def _cmd_bench(cfg: dict) -> int:
    rows = bench_eigs(cfg["n_grid"], cfg["k_grid"], avg_degree=cfg["avg_degree"],
                      seeds=cfg["seeds"], repeats=cfg["repeats"], h=cfg["h"],
                      out=cfg["out"] or "bench")
    failed = sum(1 for r in rows if r.error)
    for r in rows:
        print(f"n={r.n} k={r.k} seed={r.seed}: "
              + (f"{r.wall_time_s:.2f}s peak={r.peak_bytes}" if not r.error
                 else r.error))
    return 2 if failed else 0


def _cmd_sensitivity(cfg: dict) -> int:
    out = cfg.get("out") or "sensitivity"
    cfg = dict(cfg, out="")
    rows = sensitivity_sweeps(cfg)
    write_rows_csv(rows, SENSITIVITY_COLUMNS, out + ".csv")
    failed = sum(1 for r in rows if r.error)
    print(f"wrote {out}.csv: {len(rows)} rows, {failed} failed")
    return 2 if failed else 0


_COMMANDS = {
    "gen": (_cmd_gen, {**GRAPH_DEFAULTS, "out": "graph.txt"}),
    "spectrum": (_cmd_spectrum, {**GRAPH_DEFAULTS, "solver": "full",
                                 "k_small": 32, "k_large": 32,
                                 "canonical": True, "out": "spectrum.csv"}),
    "encode": (_cmd_encode, {**GRAPH_DEFAULTS, "encoding": "llpe:M=16,d=8",
                             "theta": "", "canonical": True, "solver": "full",
                             "k_small": 32, "k_large": 32,
                             "out": "encoding.csv"}),
    "distance": (_cmd_distance, {**GRAPH_DEFAULTS, "kernel": "diffusion",
                                 "t": 1.0, "solver": "full", "canonical": True,
                                 "k_small": 32, "k_large": 32,
                                 "out": "distance.csv"}),
    "community": (_cmd_community, {**GRAPH_DEFAULTS, "selector": "first_nontrivial",
                                   "method": "kmeans", "solver": "full",
                                   "canonical": True, "k_small": 32, "k_large": 32,
                                   "out": "labels.csv"}),
    "train": (_cmd_train, {**GRAPH_DEFAULTS, "feature_mode": "binary",
                           "encoding": "llpe:M=64,d=32,l1=0.001",
                           "arch": "mlp", "hidden": 64, "lr": 0.01,
                           "epochs": 500, "patience": 100, "weight_decay": 0.0,
                           "optimizer": "adam",
                           "split_fractions": [0.6, 0.2, 0.2],
                           "out": "train.json"}),
    "sweep": (_cmd_sweep, None),
    "rademacher": (_cmd_rademacher, RADEMACHER_DEFAULTS),
    "bench": (_cmd_bench, BENCH_DEFAULTS),
    "sensitivity": (_cmd_sensitivity, SENSITIVITY_DEFAULTS),
}


def _load_section(path: str | None, name: str) -> dict:
    if not path:
        return {}
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ParameterError(f"{path}: config must be a JSON object")
    section = data.get(name, data)
    if not isinstance(section, dict):
        raise ParameterError(f"{path}: section {name!r} must be a JSON object")
    # a sectioned file may sit next to other verbs' sections; a flat file
    # is the section itself
    if name in data:
        return dict(section)
    return {k: v for k, v in section.items() if k not in _COMMANDS}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="spectral-pe",
        description="Spectral positional-encoding experiments")
    parser.add_argument("subcommand", choices=sorted(_COMMANDS))
    parser.add_argument("--config", default=None, help="JSON config file")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    parser.add_argument("--out", default=None, help="override the output path")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses status 2 for usage errors; 2 is reserved for runs
        # that finished with soft per-cell failures
        return 0 if exc.code in (0, None) else 1

    handler, defaults = _COMMANDS[args.subcommand]
    try:
        raw = _load_section(args.config, args.subcommand)
        if args.seed is not None:
            if args.subcommand in ("sweep", "bench", "sensitivity"):
                raw["seeds"] = [args.seed]
            else:
                raw["seed"] = args.seed
        if args.out is not None:
            raw["out"] = args.out
        if args.subcommand == "sweep":
            cfg = raw  # validated by ExperimentConfig.from_dict
        else:
            cfg = _merge_defaults(raw, defaults, args.subcommand)
        return handler(cfg)
    except (SpectralPEError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

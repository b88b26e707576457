"""Plain-text graph persistence.

Edge-list format: first line "n m", then m lines "u v" with 0-based
endpoints and u < v, sorted.  Optional companions in the same
directory: features.csv (n rows, no header) and labels.csv (one int
per line).  A save/load/save round trip is byte-identical.
"""

from __future__ import annotations

import os
import warnings

import numpy as np

from .errors import GraphFormatError
from .graphs import Graph

FEATURES_NAME = "features.csv"
LABELS_NAME = "labels.csv"


def save_graph(graph, path):
    """Write the edge list to `path`, companions beside it when present."""
    edges = graph.edge_list()
    lines = [f"{graph.n} {graph.num_edges}\n"]
    lines.extend(f"{u} {v}\n" for u, v in edges)
    with open(path, "w") as fh:
        fh.writelines(lines)
    folder = os.path.dirname(os.path.abspath(path))
    if graph.features is not None:
        with open(os.path.join(folder, FEATURES_NAME), "w") as fh:
            for row in graph.features:
                fh.write(",".join(repr(float(x)) for x in row) + "\n")
    if graph.labels is not None:
        with open(os.path.join(folder, LABELS_NAME), "w") as fh:
            for y in graph.labels:
                fh.write(f"{int(y)}\n")


def load_graph(path):
    """Parse an edge-list file; malformed input raises with a line number.

    Duplicate edges are removed with a warning.  Companion feature and
    label files are picked up from the same directory when they exist.
    """
    with open(path) as fh:
        raw = fh.readlines()
    if not raw:
        raise GraphFormatError(f"{path}: empty file")

    def parse_ints(line_no, expect):
        parts = raw[line_no].split()
        if len(parts) != expect:
            raise GraphFormatError(
                f"{path}: line {line_no + 1}: expected {expect} fields, got {len(parts)}")
        try:
            return [int(p) for p in parts]
        except ValueError:
            raise GraphFormatError(
                f"{path}: line {line_no + 1}: non-integer field") from None

    n, m = parse_ints(0, 2)
    if n < 0 or m < 0:
        raise GraphFormatError(f"{path}: line 1: negative n or m")
    if len(raw) - 1 < m:
        raise GraphFormatError(
            f"{path}: header promises {m} edges, file has {len(raw) - 1} edge lines")
    edges = np.empty((m, 2), dtype=np.int64)
    for row in range(m):
        u, v = parse_ints(row + 1, 2)
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(f"{path}: line {row + 2}: endpoint out of range")
        if u == v:
            raise GraphFormatError(f"{path}: line {row + 2}: self-loop")
        if u > v:
            raise GraphFormatError(f"{path}: line {row + 2}: endpoints must satisfy u < v")
        edges[row] = (u, v)

    folder = os.path.dirname(os.path.abspath(path))
    features = labels = None
    fpath = os.path.join(folder, FEATURES_NAME)
    if os.path.exists(fpath):
        features = _load_csv_floats(fpath, n)
    lpath = os.path.join(folder, LABELS_NAME)
    if os.path.exists(lpath):
        labels = _load_csv_ints(lpath, n)

    graph, dups = Graph.from_edge_array(n, edges, features=features, labels=labels,
                                        dedupe=True)
    if dups:
        warnings.warn(f"{path}: removed {dups} duplicate edge(s)", stacklevel=2)
    return graph


def _load_csv_floats(path, n):
    rows = []
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([float(x) for x in line.split(",")])
            except ValueError:
                raise GraphFormatError(f"{path}: line {line_no}: non-numeric field") from None
    arr = np.asarray(rows, dtype=np.float64)
    if arr.shape[0] != n:
        raise GraphFormatError(f"{path}: expected {n} rows, got {arr.shape[0]}")
    return arr


def _load_csv_ints(path, n):
    vals = []
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                vals.append(int(line))
            except ValueError:
                raise GraphFormatError(f"{path}: line {line_no}: non-integer label") from None
    arr = np.asarray(vals, dtype=np.int64)
    if arr.size != n:
        raise GraphFormatError(f"{path}: expected {n} labels, got {arr.size}")
    return arr

"""Graph container, random-graph generators, and homophily measures.

Graphs are undirected, unweighted, simple (no self-loops, no duplicate
edges) and live in a CSR adjacency structure.  Generators are
deterministic given a seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import GenerationError, ParameterError


class Graph:
    """Undirected graph over nodes 0..n-1 with optional features/labels.

    Parameters
    ----------
    indptr, indices : arrays
        CSR neighbor structure.  Neighbor lists must be sorted, free of
        self-loops, and symmetric (u in N(v) iff v in N(u)).
    features : (n, d_feat) float array, optional
    labels : (n,) int array, optional
    """

    def __init__(self, indptr, indices, features=None, labels=None):
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        if self.indptr.ndim != 1 or self.indptr[0] != 0:
            raise ParameterError("indptr must be 1-d and start at 0")
        if self.indptr[-1] != self.indices.size:
            raise ParameterError("indptr does not match indices length")
        if np.any(np.diff(self.indptr) < 0):
            raise ParameterError("indptr must be non-decreasing")
        n = self.n
        if self.indices.size:
            if self.indices.min() < 0 or self.indices.max() >= n:
                raise ParameterError("neighbor index out of range")
        self.features = None if features is None else np.asarray(features, dtype=np.float64)
        self.labels = None if labels is None else np.asarray(labels, dtype=np.int64)
        if self.features is not None and self.features.shape[0] != n:
            raise ParameterError("features row count != n")
        if self.labels is not None and self.labels.shape != (n,):
            raise ParameterError("labels shape != (n,)")
        self._degrees = None

    @property
    def n(self):
        return self.indptr.size - 1

    @property
    def num_edges(self):
        return self.indices.size // 2

    @property
    def degrees(self):
        if self._degrees is None:
            self._degrees = np.diff(self.indptr).astype(np.int64)
        return self._degrees

    def neighbors(self, i):
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def adjacency(self):
        """Adjacency as a scipy CSR matrix with unit weights."""
        data = np.ones(self.indices.size, dtype=np.float64)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def check(self):
        """Assert structural invariants; raises ParameterError on violation."""
        n = self.n
        for what, cond in [
            ("self-loop", np.any(self._row_of_indices() == self.indices)),
            ("unsorted or duplicate neighbor list",
             any(np.any(np.diff(self.neighbors(i)) <= 0)
                 for i in range(n) if self.degrees[i] > 1)),
        ]:
            if cond:
                raise ParameterError(f"invalid graph: {what}")
        a = self.adjacency()
        if (a != a.T).nnz != 0:
            raise ParameterError("invalid graph: adjacency not symmetric")

    def _row_of_indices(self):
        return np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)

    @classmethod
    def from_edge_array(cls, n, edges, features=None, labels=None, dedupe=False):
        """Build a graph from an (m, 2) array of undirected edges.

        Edges may appear in either orientation.  Self-loops raise; with
        dedupe=False duplicate edges raise too, otherwise they collapse.
        Returns (graph, num_duplicates_removed).
        """
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edges.size:
            if edges.min() < 0 or edges.max() >= n:
                raise ParameterError("edge endpoint out of range")
            if np.any(edges[:, 0] == edges[:, 1]):
                raise ParameterError("self-loops are not allowed")
        lo = np.minimum(edges[:, 0], edges[:, 1])
        hi = np.maximum(edges[:, 0], edges[:, 1])
        key = lo * n + hi
        uniq, counts = np.unique(key, return_counts=True)
        dups = int(edges.shape[0] - uniq.size)
        if dups and not dedupe:
            raise ParameterError(f"{dups} duplicate edge(s)")
        lo, hi = uniq // n, uniq % n
        both_u = np.concatenate([lo, hi])
        both_v = np.concatenate([hi, lo])
        order = np.lexsort((both_v, both_u))
        indices = both_v[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, both_u + 1, 1)
        indptr = np.cumsum(indptr)
        return cls(indptr, indices, features=features, labels=labels), dups

    def edge_list(self):
        """Edges as an (m, 2) array with u < v, sorted lexicographically."""
        rows = self._row_of_indices()
        mask = rows < self.indices
        return np.column_stack([rows[mask], self.indices[mask]])


# ---------------------------------------------------------------------------
# stochastic block model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SbmParams:
    """Planted-partition model G(n, k, p, q) with contiguous equal blocks."""

    n: int
    k: int
    p: float
    q: float

    def __post_init__(self):
        if self.k < 1 or self.n < self.k:
            raise ParameterError(f"need n >= k >= 1, got n={self.n}, k={self.k}")
        for name, val in [("p", self.p), ("q", self.q)]:
            if not 0.0 <= val <= 1.0:
                raise ParameterError(f"{name}={val} outside [0, 1]")


def sbm_from_homophily(n, k, h, avg_degree):
    """Map a homophily level h in [0, 1] and target average degree to (p, q).

    Intra-class edges get expected degree h*avg_degree spread over the
    n/k - 1 same-block partners, inter-class edges the complement.
    """
    if not 0.0 <= h <= 1.0:
        raise ParameterError(f"homophily h={h} outside [0, 1]")
    if avg_degree <= 0:
        raise ParameterError("avg_degree must be positive")
    c = n / k
    if c <= 1:
        raise ParameterError("blocks of size <= 1 cannot carry intra-class edges")
    p = h * avg_degree / (c - 1.0)
    q = (1.0 - h) * avg_degree / (n - c)
    if p > 1.0 or q > 1.0:
        raise ParameterError(
            f"avg_degree={avg_degree} too large for n={n}, k={k}: p={p:.4f}, q={q:.4f}")
    return SbmParams(n=n, k=k, p=p, q=q)


def sbm_community_labels(n, k):
    """Community of node i is floor(i*k/n); blocks are contiguous."""
    return (np.arange(n, dtype=np.int64) * k) // n


def _bernoulli_indices(rng, total, prob):
    """Indices of successes among `total` iid Bernoulli(prob) slots.

    Uses geometric gap skipping so the cost is O(#successes), not O(total).
    """
    if total <= 0 or prob <= 0.0:
        return np.empty(0, dtype=np.int64)
    if prob >= 1.0:
        return np.arange(total, dtype=np.int64)
    out = []
    pos = -1
    # draw gaps in chunks; geometric(p) counts trials up to & incl. success
    chunk = max(256, int(total * prob * 1.1) + 16)
    while pos < total:
        gaps = rng.geometric(prob, size=chunk)
        hits = pos + np.cumsum(gaps)
        out.append(hits)
        pos = int(hits[-1])
    hits = np.concatenate(out)
    return hits[hits < total]


def _decode_triangle(t, c):
    """Map flat index t in [0, c*(c-1)/2) to pair (i, j), i < j < c.

    Pairs are enumerated row-major: (0,1), (0,2), ..., (1,2), ...
    """
    t = np.asarray(t, dtype=np.int64)
    # row i starts at offset(i) = i*c - i*(i+1)/2
    i = np.floor((2 * c - 1 - np.sqrt((2 * c - 1) ** 2 - 8.0 * t)) / 2.0).astype(np.int64)
    # float sqrt can be off by one near row boundaries in either direction
    for _ in range(2):
        off = i * c - (i * (i + 1)) // 2
        i = np.where(off > t, i - 1, i)
        off_next = (i + 1) * c - ((i + 1) * (i + 2)) // 2
        i = np.where(t >= off_next, i + 1, i)
    off = i * c - (i * (i + 1)) // 2
    j = t - off + i + 1
    return i, j


def sbm_generate(params, seed=0):
    """Sample a graph from the planted-partition model.

    Each intra-block pair is an edge with probability p, each
    inter-block pair with probability q, independently.  Labels are the
    block ids.  Runs in O(n + m) via geometric skipping, so sparse
    graphs with n ~ 1e5 are fine.
    """
    n, k = params.n, params.k
    labels = sbm_community_labels(n, k)
    starts = np.searchsorted(labels, np.arange(k + 1))
    rng = np.random.default_rng(seed)
    chunks = []
    for a in range(k):
        na = starts[a + 1] - starts[a]
        # intra-block upper triangle
        tri = _bernoulli_indices(rng, na * (na - 1) // 2, params.p)
        if tri.size:
            i, j = _decode_triangle(tri, na)
            chunks.append(np.column_stack([i + starts[a], j + starts[a]]))
        for b in range(a + 1, k):
            nb = starts[b + 1] - starts[b]
            rect = _bernoulli_indices(rng, na * nb, params.q)
            if rect.size:
                i, j = rect // nb, rect % nb
                chunks.append(np.column_stack([i + starts[a], j + starts[b]]))
    edges = np.concatenate(chunks, axis=0) if chunks else np.empty((0, 2), dtype=np.int64)
    graph, _ = Graph.from_edge_array(n, edges, labels=labels)
    return graph


# ---------------------------------------------------------------------------
# preferential attachment with class compatibility
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PaParams:
    """Degree-driven attachment with a class-compatibility matrix H.

    A new node of class i picks each of its m_edges endpoints among the
    existing nodes v with probability proportional to H[i, cls(v)] * deg(v).
    """

    n: int
    m_edges: int
    k: int
    compat: tuple  # k x k rows, nested tuples so the dataclass stays hashable
    label_dist: tuple

    def __post_init__(self):
        h = np.asarray(self.compat, dtype=np.float64)
        d = np.asarray(self.label_dist, dtype=np.float64)
        if self.m_edges < 1:
            raise ParameterError("m_edges must be >= 1")
        if self.n < self.m_edges + 1:
            raise ParameterError("need n >= m_edges + 1")
        if h.shape != (self.k, self.k) or np.any(h < 0):
            raise ParameterError("compat must be a nonnegative k x k matrix")
        if d.shape != (self.k,) or np.any(d < 0) or not np.isclose(d.sum(), 1.0):
            raise ParameterError("label_dist must be a probability vector of length k")


def pa_generate(params, seed=0):
    """Grow a preferential-attachment graph with class-aware targeting.

    Starts from a clique on m_edges + 1 nodes with round-robin classes.
    Duplicate targets are resampled up to 100 times, then the endpoint
    is skipped.  Raises GenerationError when a class has no compatible
    target at all.
    """
    n, m, k = params.n, params.m_edges, params.k
    compat = np.asarray(params.compat, dtype=np.float64)
    rng = np.random.default_rng(seed)
    labels = np.empty(n, dtype=np.int64)
    seed_nodes = m + 1
    labels[:seed_nodes] = np.arange(seed_nodes) % k
    labels[seed_nodes:] = rng.choice(k, size=n - seed_nodes, p=np.asarray(params.label_dist))
    deg = np.zeros(n, dtype=np.float64)
    edges = []
    for u in range(seed_nodes):
        for v in range(u + 1, seed_nodes):
            edges.append((u, v))
            deg[u] += 1
            deg[v] += 1
    for u in range(seed_nodes, n):
        weights = compat[labels[u], labels[:u]] * deg[:u]
        total = weights.sum()
        if total <= 0.0:
            raise GenerationError(
                f"node {u} (class {labels[u]}) has no compatible attachment target")
        chosen = set()
        for _ in range(m):
            for _attempt in range(100):
                # weights drift as this node's earlier edges land
                v = rng.choice(u, p=weights / total)
                if v not in chosen:
                    break
            else:
                continue  # give up on this endpoint, degree deficit allowed
            chosen.add(int(v))
            edges.append((int(v), u))
            deg[v] += 1
            deg[u] += 1
            weights[v] = compat[labels[u], labels[v]] * deg[v]
            total = weights.sum()
    graph, _ = Graph.from_edge_array(n, np.asarray(edges, dtype=np.int64), labels=labels)
    return graph


# ---------------------------------------------------------------------------
# node features
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FeatureGenParams:
    """Gaussian class-conditioned features.

    mode="binary": dim iid Gaussians with mean y*mu (class 0 centered at
    the origin) and std sigma.  mode="multiclass": mean mu * one_hot(y),
    dim forced to the class count.
    """

    mode: str = "binary"
    dim: int = 10
    mu: float = 0.05
    sigma: float = 1.0

    def __post_init__(self):
        if self.mode not in ("binary", "multiclass"):
            raise ParameterError(f"unknown feature mode {self.mode!r}")
        if self.dim < 1 or self.sigma < 0:
            raise ParameterError("need dim >= 1 and sigma >= 0")


def gen_features(labels, params, seed=0):
    """Sample class-conditioned Gaussian features, bit-reproducible per seed."""
    labels = np.asarray(labels, dtype=np.int64)
    n = labels.size
    rng = np.random.default_rng(seed)
    if params.mode == "binary":
        if labels.max(initial=0) > 1:
            raise ParameterError("binary feature mode needs labels in {0, 1}")
        means = np.repeat(labels[:, None] * params.mu, params.dim, axis=1)
    else:
        k = int(labels.max(initial=-1)) + 1
        if params.dim < k:
            raise ParameterError(
                f"multiclass feature dim={params.dim} smaller than "
                f"number of classes {k}")
        means = np.zeros((n, params.dim))
        means[np.arange(n), labels] = params.mu
    return means + rng.normal(0.0, params.sigma, size=means.shape)


# ---------------------------------------------------------------------------
# homophily measures
# ---------------------------------------------------------------------------

def edge_homophily(graph):
    """Fraction of edges joining same-label endpoints."""
    if graph.labels is None:
        raise ParameterError("graph has no labels")
    if graph.num_edges == 0:
        raise ParameterError("edge homophily undefined on an empty graph")
    rows = graph._row_of_indices()
    same = graph.labels[rows] == graph.labels[graph.indices]
    return float(same.sum()) / (2 * graph.num_edges)


def local_homophily(graph, node):
    """Fraction of node's neighbors sharing its label; 0.0 when isolated."""
    if graph.labels is None:
        raise ParameterError("graph has no labels")
    nbrs = graph.neighbors(node)
    if nbrs.size == 0:
        return 0.0
    return float(np.mean(graph.labels[nbrs] == graph.labels[node]))


def local_homophily_profile(graph):
    """Per-node local homophily as an (n,) array plus an isolated-node mask."""
    if graph.labels is None:
        raise ParameterError("graph has no labels")
    rows = graph._row_of_indices()
    same = (graph.labels[rows] == graph.labels[graph.indices]).astype(np.float64)
    sums = np.zeros(graph.n)
    np.add.at(sums, rows, same)
    deg = graph.degrees
    isolated = deg == 0
    vals = np.divide(sums, deg, out=np.zeros(graph.n), where=~isolated)
    return vals, isolated


def quintile_bucketing(values, num_buckets=5):
    """Assign each value a bucket 0..num_buckets-1 by rank.

    Ranks break ties by index, buckets have near-equal population
    (bucket of rank r is floor(r * num_buckets / n)).
    """
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    if n == 0:
        raise ParameterError("cannot bucket an empty value list")
    order = np.lexsort((np.arange(n), values))
    ranks = np.empty(n, dtype=np.int64)
    ranks[order] = np.arange(n)
    return (ranks * num_buckets) // n


# ---------------------------------------------------------------------------
# normalized Laplacian
# ---------------------------------------------------------------------------

def normalized_laplacian(graph):
    """Symmetric normalized Laplacian I - D^{-1/2} A D^{-1/2} as sparse CSR.

    Rows and columns of isolated nodes are identically zero (their
    diagonal entry is 0, not 1), so the spectrum stays inside [0, 2]
    and isolated nodes contribute eigenvalue 0.
    """
    a = graph.adjacency()
    deg = graph.degrees.astype(np.float64)
    with np.errstate(divide="ignore"):
        dinv_sqrt = 1.0 / np.sqrt(deg)
    dinv_sqrt[np.isinf(dinv_sqrt)] = 0.0
    d = sp.diags(dinv_sqrt)
    lap = sp.diags((deg > 0).astype(np.float64)) - d @ a @ d
    return lap.tocsr()

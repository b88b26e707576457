"""Community recovery from Laplacian eigenvectors.

Covers the two recovery regimes on block models: homophilous graphs
(assortative, p > q) cluster on the first nontrivial eigenvectors,
heterophilous graphs (q > p) on the last ones.  Also provides the
closed-form expected Laplacian of the block model, its spectrum, and
a concentration check of the sampled Laplacian against it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse.linalg import LinearOperator

from .encodings import LlpeParams, llpe_forward
from .errors import ConfigurationError, ConvergenceError, ParameterError
from .graphs import Graph, SbmParams, normalized_laplacian
from .spectral import ZERO_EIG_TOL, SpectralDecomposition, operator_norm

SELECTORS = ("first_nontrivial", "last", "sign_of_last", "llpe")


@dataclass(frozen=True)
class Partition:
    """Cluster labels over nodes, each in [0, k)."""

    labels: np.ndarray
    k: int

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", labels)
        if labels.ndim != 1:
            raise ParameterError("labels must be 1-d")
        if self.k < 1:
            raise ParameterError("k must be >= 1")
        if labels.size and (labels.min() < 0 or labels.max() >= self.k):
            raise ParameterError("labels must lie in [0, k)")

    @property
    def n(self) -> int:
        return self.labels.size


@dataclass(frozen=True)
class RecoveryReport:
    """Best label-permutation alignment of predicted vs true clusters."""

    misclassified: int
    accuracy: float
    permutation: tuple[int, ...]


def expected_laplacian(params: SbmParams) -> np.ndarray:
    """Dense E[L] of the block model, edge probabilities taken exactly.

    E[A] is block-constant at p within a community and q across,
    including the diagonal; expected degrees normalize it.
    """
    if params.p == 0.0 and params.q == 0.0:
        raise ParameterError("p = q = 0 leaves no expected edges")
    n, k = params.n, params.k
    labels = (np.arange(n) * k) // n
    same = labels[:, None] == labels[None, :]
    ea = np.where(same, params.p, params.q)
    deg = ea.sum(axis=1)
    if deg.min() <= 0:
        raise ParameterError("expected degrees must be positive")
    dis = 1.0 / np.sqrt(deg)
    return np.eye(n) - ea * dis[:, None] * dis[None, :]


def expected_spectrum(params: SbmParams) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form eigenvalues of E[L] with multiplicities, for k | n.

    Returns (values, multiplicities): {0: 1, kq/(p+(k-1)q): k-1, 1: n-k}
    in ascending eigenvalue order.
    """
    n, k, p, q = params.n, params.k, params.p, params.q
    if n % k != 0:
        raise ParameterError("closed-form spectrum needs equal blocks (k | n)")
    if p == 0.0 and q == 0.0:
        raise ParameterError("p = q = 0 leaves no expected edges")
    lam = k * q / (p + (k - 1) * q)
    values = np.array([0.0, lam, 1.0])
    mults = np.array([1, k - 1, n - k])
    order = np.argsort(values, kind="stable")
    return values[order], mults[order]


def _kernel_contrasts(spectrum: SpectralDecomposition, graph: Graph | None) -> np.ndarray:
    """Zero-eigenspace directions orthogonal to the known trivial ones.

    The Laplacian kernel always contains D^{1/2} 1 and one indicator per
    isolated node; what remains separates connected components, which is
    exactly the community signal when blocks are disconnected.  Needs the
    graph for degrees; without it a multi-dimensional kernel is ambiguous.
    """
    avail = spectrum.num_pairs if spectrum.kind == "full" else spectrum.k_small
    zero = np.flatnonzero(spectrum.eigenvalues[:avail] <= ZERO_EIG_TOL)
    if zero.size <= 1:
        return np.zeros((spectrum.n, 0))
    if graph is None:
        raise ConfigurationError(
            "spectrum has a multi-dimensional kernel; pass the graph so the "
            "trivial directions can be separated from community contrasts")
    kernel = spectrum.eigenvectors[:, zero]
    degrees = graph.degrees.astype(np.float64)
    trivial = [np.sqrt(degrees)]
    for i in np.flatnonzero(degrees == 0):
        e = np.zeros(graph.n)
        e[i] = 1.0
        trivial.append(e)
    t = np.stack(trivial, axis=1)
    t /= np.linalg.norm(t, axis=0)
    # contrasts = kernel directions with the trivial span projected out
    resid = kernel - t @ (t.T @ kernel)
    u, s, _ = np.linalg.svd(resid, full_matrices=False)
    contrasts = u[:, s > 1e-8]
    if contrasts.shape[1] > 1:
        # order by volume so contrasts between large components come first
        vol = contrasts.T @ (degrees[:, None] * contrasts)
        w, r = np.linalg.eigh(vol)
        contrasts = contrasts @ r[:, ::-1]
    return contrasts


def _select_vectors(spectrum: SpectralDecomposition, selector, k: int,
                    graph: Graph | None) -> np.ndarray:
    if selector == "last":
        _, vecs = spectrum.largest(k - 1)
        return vecs
    if selector == "sign_of_last":
        _, vecs = spectrum.largest(1)
        return vecs
    if selector == "first_nontrivial":
        contrasts = _kernel_contrasts(spectrum, graph)
        need = k - 1
        if contrasts.shape[1] >= need:
            return contrasts[:, :need]
        avail = spectrum.num_pairs if spectrum.kind == "full" else spectrum.k_small
        vals = spectrum.eigenvalues[:avail]
        pos = np.flatnonzero(vals > ZERO_EIG_TOL)
        extra = need - contrasts.shape[1]
        if pos.size < extra:
            raise ConfigurationError(
                f"need {need} nontrivial small-end eigenvectors, spectrum "
                f"retains {contrasts.shape[1] + pos.size}")
        return np.hstack([contrasts, spectrum.eigenvectors[:, pos[:extra]]])
    raise ParameterError(f"unknown selector {selector!r}")


def kmeans(points: np.ndarray, k: int, seed: int = 0, restarts: int = 10,
           max_iter: int = 300) -> tuple[np.ndarray, float]:
    """Lloyd's algorithm with k-means++ seeding and best-of-restarts.

    Returns (labels, inertia).  Restarts that converge onto an empty
    cluster are discarded; if all of them do, raises ConvergenceError.
    """
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if n < k:
        raise ParameterError(f"cannot form {k} clusters from {n} points")
    rng = np.random.default_rng(seed)
    best_labels, best_inertia = None, np.inf
    for _ in range(restarts):
        centers = _kmeanspp(points, k, rng)
        labels = None
        for _ in range(max_iter):
            d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
            labels = d2.argmin(axis=1)
            new_centers = np.empty_like(centers)
            empty = False
            for c in range(k):
                mask = labels == c
                if not mask.any():
                    empty = True
                    break
                new_centers[c] = points[mask].mean(axis=0)
            if empty:
                labels = None
                break
            shift = np.abs(new_centers - centers).max()
            centers = new_centers
            if shift < 1e-12:
                break
        if labels is None:
            continue
        inertia = ((points - centers[labels]) ** 2).sum()
        if inertia < best_inertia:
            best_labels, best_inertia = labels, inertia
    if best_labels is None:
        raise ConvergenceError(
            f"every k-means restart collapsed onto an empty cluster (k={k})")
    return best_labels, float(best_inertia)


def _kmeanspp(points: np.ndarray, k: int, rng) -> np.ndarray:
    n = points.shape[0]
    centers = [points[rng.integers(n)]]
    d2 = ((points - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            centers.append(points[rng.integers(n)])
            continue
        idx = rng.choice(n, p=d2 / total)
        centers.append(points[idx])
        d2 = np.minimum(d2, ((points - points[idx]) ** 2).sum(axis=1))
    return np.stack(centers)


def spectral_partition(spectrum: SpectralDecomposition, selector, k: int,
                       method: str = "kmeans", seed: int = 0,
                       graph: Graph | None = None,
                       llpe_params: LlpeParams | None = None) -> Partition:
    """Cluster nodes from selected eigenvector coordinates.

    selector: "first_nontrivial" (k-1 upward from the kernel), "last"
    (k-1 downward), "sign_of_last" (the top eigenvector alone), or
    "llpe" (rows of the encoding built from llpe_params).  method
    "sign" thresholds a single column at 0 and needs k = 2; "kmeans"
    clusters rows.
    """
    if k < 2:
        raise ParameterError("recovery needs k >= 2")
    if method not in ("sign", "kmeans"):
        raise ParameterError(f"unknown method {method!r}")
    if selector == "llpe":
        if llpe_params is None:
            raise ConfigurationError("llpe selector needs llpe_params")
        feats = llpe_forward(spectrum, llpe_params).matrix
    else:
        feats = _select_vectors(spectrum, selector, k, graph)
    if method == "sign":
        if k != 2:
            raise ParameterError("sign method only applies to k = 2")
        if feats.shape[1] != 1:
            raise ParameterError(
                f"sign method needs exactly one column, got {feats.shape[1]}")
        return Partition(labels=(feats[:, 0] > 0).astype(np.int64), k=2)
    labels, _ = kmeans(feats, k, seed=seed)
    return Partition(labels=labels, k=k)


def align_errors(pred: Partition, truth: Partition) -> RecoveryReport:
    """Misclassification count minimized over label permutations."""
    if pred.n != truth.n:
        raise ConfigurationError("partitions cover different node counts")
    if pred.k != truth.k:
        raise ConfigurationError(f"cluster counts differ: {pred.k} vs {truth.k}")
    k, n = pred.k, pred.n
    if k > 10:
        raise ParameterError("alignment supported up to k = 10")
    confusion = np.zeros((k, k), dtype=np.int64)
    np.add.at(confusion, (pred.labels, truth.labels), 1)
    if k <= 8:
        best_perm, best_hits = None, -1
        for perm in itertools.permutations(range(k)):
            hits = confusion[np.arange(k), perm].sum()
            if hits > best_hits:
                best_perm, best_hits = perm, hits
    else:
        rows, cols = linear_sum_assignment(-confusion)
        perm = np.empty(k, dtype=np.int64)
        perm[rows] = cols
        best_perm, best_hits = tuple(int(c) for c in perm), confusion[rows, cols].sum()
    mis = int(n - best_hits)
    return RecoveryReport(misclassified=mis, accuracy=1.0 - mis / n,
                          permutation=tuple(int(c) for c in best_perm))


def concentration_check(graph: Graph, params: SbmParams,
                        delta: float = 0.05) -> tuple[float, float, bool]:
    """Observed ||E[L] - L|| against 14 sqrt(ln(4n/delta) / min_degree)."""
    if not 0 < delta < 1:
        raise ParameterError("delta must be in (0, 1)")
    min_deg = int(graph.degrees.min())
    if min_deg < 1:
        raise ParameterError("concentration bound needs min degree >= 1")
    el = expected_laplacian(params)
    lap = normalized_laplacian(graph)
    op = LinearOperator(shape=el.shape,
                        matvec=lambda v: el @ v - lap @ v,
                        dtype=np.float64)
    observed = operator_norm(op)
    bound = 14.0 * np.sqrt(np.log(4.0 * graph.n / delta) / min_deg)
    return observed, bound, observed <= bound

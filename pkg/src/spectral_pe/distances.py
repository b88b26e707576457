"""Spectral distances between nodes and their polynomial realizations.

A kernel r >= 0 over the Laplacian spectrum induces the squared
distance f_r(i,j)^2 = sum_k r(lambda_k) (u_k[i] - u_k[j])^2.  Named
kernels cover commute time, diffusion, biharmonic and a high-pass
counterpart.  `bump_llpe_construct` compiles any kernel into learnable
encoding coefficients whose pairwise encoding gaps reproduce f_r^2 up
to polynomial-approximation error.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .chebyshev import ChebyshevSeries, cheb_fit
from .errors import KernelError, ParameterError, ReachabilityError
from .graphs import Graph
from .spectral import SpectralDecomposition, normalize_eigenvalues
from .encodings import LlpeParams

# singular kernels (1/lambda, 1/lambda^2) skip eigenvalues below this
LAMBDA_FLOOR = 1e-8


@dataclass(frozen=True)
class SpectralKernel:
    """A nonnegative weight r(lambda) over [0, 2].

    Variants: commute (1/lambda^2), diffusion (e^{-2 t lambda}),
    biharmonic (1/lambda), highpass (e^{-2 t (2 - lambda)}), custom
    (a ChebyshevSeries evaluated at the shifted eigenvalue lambda - 1).
    The two reciprocal kernels are singular at 0 and are only ever
    evaluated above LAMBDA_FLOOR.
    """

    variant: str
    t: float = 0.0
    series: ChebyshevSeries | None = None

    def __post_init__(self):
        if self.variant not in ("commute", "diffusion", "biharmonic",
                                "highpass", "custom"):
            raise ParameterError(f"unknown kernel variant {self.variant!r}")
        if self.variant in ("diffusion", "highpass") and self.t <= 0:
            raise ParameterError(f"{self.variant} kernel needs t > 0")
        if self.variant == "custom" and self.series is None:
            raise ParameterError("custom kernel needs a ChebyshevSeries")

    @property
    def singular(self) -> bool:
        return self.variant in ("commute", "biharmonic")

    def evaluate(self, eigenvalues: np.ndarray) -> np.ndarray:
        """r at each eigenvalue; raises if any value comes out negative."""
        lam = np.asarray(eigenvalues, dtype=np.float64)
        if self.variant == "commute":
            r = 1.0 / lam ** 2
        elif self.variant == "biharmonic":
            r = 1.0 / lam
        elif self.variant == "diffusion":
            r = np.exp(-2.0 * self.t * lam)
        elif self.variant == "highpass":
            r = np.exp(-2.0 * self.t * (2.0 - lam))
        else:
            r = self.series(normalize_eigenvalues(lam))
        r = np.asarray(r, dtype=np.float64)
        if r.size and r.min() < 0:
            bad = lam[np.argmin(r)]
            raise KernelError(
                f"kernel {self.variant!r} negative at lambda={bad}")
        return r

    @property
    def name(self) -> str:
        if self.variant in ("diffusion", "highpass"):
            return f"{self.variant}:t={self.t:g}"
        return self.variant


@dataclass
class DistanceMatrix:
    """Pairwise f_r values: symmetric, nonnegative, zero diagonal.

    `approximate` marks matrices built from a truncated (extremal)
    spectrum, where the missing eigenpairs bias every entry.
    """

    values: np.ndarray
    kernel: SpectralKernel
    approximate: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        v = self.values
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ParameterError("distance matrix must be square")
        if not np.allclose(v, v.T, atol=1e-10):
            raise ParameterError("distance matrix must be symmetric")
        if np.abs(np.diag(v)).max(initial=0.0) > 1e-12 or v.min(initial=0.0) < 0:
            raise ParameterError("distances must be nonnegative with zero diagonal")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def save_csv(self, path) -> None:
        np.savetxt(path, self.values, delimiter=",")


def spectral_distance_matrix(spectrum: SpectralDecomposition,
                             kernel: SpectralKernel) -> DistanceMatrix:
    """All-pairs f_r from whatever eigenpairs the spectrum retains."""
    lam = spectrum.eigenvalues
    keep = lam > LAMBDA_FLOOR if kernel.singular else np.ones(lam.size, bool)
    vecs = spectrum.eigenvectors[:, keep]
    r = kernel.evaluate(lam[keep])
    gram = (vecs * r) @ vecs.T
    diag = np.diag(gram)
    sq = diag[:, None] + diag[None, :] - 2.0 * gram
    np.fill_diagonal(sq, 0.0)
    values = np.sqrt(np.maximum(sq, 0.0))
    values = 0.5 * (values + values.T)
    return DistanceMatrix(values=values, kernel=kernel,
                          approximate=spectrum.kind != "full")


BUMP_NODE_CAP = 50


def bump_llpe_construct(spectrum: SpectralDecomposition, kernel: SpectralKernel,
                        order: int, c_max: float = 200.0) -> LlpeParams:
    """Coefficients whose encoding gaps reproduce f_r^2, one column per node.

    Column j fits a Gaussian bump of height sqrt(r(lambda_j)) centered
    at the shifted eigenvalue of node j's index: as c_max sharpens the
    bumps and `order` tracks them, ||P_i - P_j||^2 -> f_r(i,j)^2.
    Eigenvalues must be separated for the bumps to stay apart; a gap
    below 3/sqrt(c_max) (including exact multiplicities) draws a
    warning because cross-talk then floors the achievable error.
    """
    if spectrum.kind != "full":
        raise ParameterError("bump construction needs the full spectrum")
    n = spectrum.n
    if n > BUMP_NODE_CAP:
        raise ParameterError(f"bump construction capped at n={BUMP_NODE_CAP}")
    if c_max <= 0:
        raise ParameterError("c_max must be > 0")
    lam = spectrum.eigenvalues
    lam_shift = normalize_eigenvalues(lam)
    gaps = np.diff(np.sort(lam_shift))
    if gaps.size and gaps.min() < 3.0 / np.sqrt(c_max):
        warnings.warn(
            f"minimum eigenvalue gap {gaps.min():.3g} below 3/sqrt(c_max)="
            f"{3.0 / np.sqrt(c_max):.3g}; bump cross-talk will limit accuracy")

    active = lam > LAMBDA_FLOOR if kernel.singular else np.ones(n, bool)
    amps = np.zeros(n)
    if active.any():
        amps[active] = np.sqrt(kernel.evaluate(lam[active]))
    theta = np.zeros((order + 1, n))
    for j in range(n):
        if amps[j] == 0.0:
            continue
        center, amp = lam_shift[j], amps[j]
        series = cheb_fit(
            lambda x: amp * np.exp(-((x - center) ** 2) * c_max), order)
        theta[:, j] = series.coeffs
    return LlpeParams(theta=theta)


@dataclass
class CommuteEstimate:
    """Monte-Carlo round-trip walk summary for one node pair."""

    mean: float
    stderr: float
    trials: int
    truncated: int


def _reachable(graph: Graph, start: int, goal: int) -> bool:
    seen = np.zeros(graph.n, dtype=bool)
    seen[start] = True
    frontier = [start]
    while frontier:
        nxt = []
        for u in frontier:
            for v in graph.neighbors(u):
                if not seen[v]:
                    if v == goal:
                        return True
                    seen[v] = True
                    nxt.append(v)
        frontier = nxt
    return seen[goal]


def commute_mc_oracle(graph: Graph, i: int, j: int, trials: int = 1000,
                      max_steps: int = 100_000, seed: int = 0) -> CommuteEstimate:
    """Empirical mean round-trip steps i -> j -> i of uniform random walks.

    Walks that fail to close the loop within max_steps are dropped from
    the mean and counted in `truncated`.
    """
    if i == j:
        raise ParameterError("commute time needs two distinct nodes")
    if not (0 <= i < graph.n and 0 <= j < graph.n):
        raise ParameterError("node index out of range")
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    if (graph.degrees == 0).any() or not _reachable(graph, i, j):
        raise ReachabilityError(f"nodes {i} and {j} are not connected")

    rng = np.random.default_rng(seed)
    indptr, indices = graph.indptr, graph.indices
    samples = []
    truncated = 0
    for _ in range(trials):
        node, target, steps = i, j, 0
        legs = 0
        while legs < 2 and steps < max_steps:
            lo, hi = indptr[node], indptr[node + 1]
            node = indices[lo + rng.integers(hi - lo)]
            steps += 1
            if node == target:
                legs += 1
                target = i
        if legs == 2:
            samples.append(steps)
        else:
            truncated += 1
    if not samples:
        raise ReachabilityError(
            f"all {trials} walks truncated at max_steps={max_steps}")
    arr = np.asarray(samples, dtype=np.float64)
    stderr = arr.std(ddof=1) / np.sqrt(arr.size) if arr.size > 1 else 0.0
    return CommuteEstimate(mean=float(arr.mean()), stderr=float(stderr),
                           trials=len(samples), truncated=truncated)

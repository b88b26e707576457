"""Positional-encoding constructions over a graph spectrum.

The menu covers fixed eigenvector selections (first-k, first+last-k,
full), random-walk return probabilities, and the learnable spectral
filter encoding: P = U B Theta where B holds Chebyshev polynomials of
the shifted eigenvalues.  The learnable route ships with its analytic
gradient and column regularizer so a trainer can update Theta jointly
with classifier weights.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .chebyshev import cheb_basis
from .errors import ConfigurationError, ParameterError
from .graphs import Graph
from .spectral import ZERO_EIG_TOL, SpectralDecomposition, normalize_eigenvalues

VARIANTS = ("nope", "lpe-fk", "lpe-flk", "lpe-full", "rwse", "llpe", "llpe-large")

# which keyword fields each variant accepts in the compact spec grammar
_FIELDS = {
    "nope": (),
    "lpe-fk": ("k",),
    "lpe-flk": ("k",),
    "lpe-full": (),
    "rwse": ("m",),
    "llpe": ("M", "d", "l1", "l2"),
    "llpe-large": ("k", "M", "d", "l1", "l2"),
}


@dataclass(frozen=True)
class EncodingSpec:
    """Which positional encoding to build, with its sizing knobs.

    `order` is the polynomial order M (M+1 coefficients per column),
    `dim` the encoding width d, `steps` the walk length for rwse and
    `k` the eigenvector count for the truncated variants.
    """

    variant: str
    k: int = 0
    steps: int = 0
    order: int = 0
    dim: int = 0
    l1: float = 0.0
    l2: float = 0.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ParameterError(f"unknown encoding variant {self.variant!r}")
        if self.variant in ("lpe-fk", "lpe-flk", "llpe-large") and self.k < 1:
            raise ParameterError("k must be >= 1")
        if self.variant == "rwse" and self.steps < 1:
            raise ParameterError("rwse needs steps >= 1")
        if self.variant in ("llpe", "llpe-large"):
            if self.order < 0:
                raise ParameterError("order must be >= 0")
            if self.dim < 1:
                raise ParameterError("dim must be >= 1")
            if self.l1 < 0 or self.l2 < 0:
                raise ParameterError("l1 and l2 must be >= 0")

    @classmethod
    def parse(cls, text: str) -> "EncodingSpec":
        """Parse the compact form `variant[:key=value,...]`.

        Examples: "nope", "lpe-fk:k=16", "rwse:m=8",
        "llpe:M=64,d=32,l1=0.001", "llpe-large:k=32,M=64,d=32".
        """
        head, _, tail = text.strip().partition(":")
        variant = head.strip().lower()
        if variant not in _FIELDS:
            raise ParameterError(f"unknown encoding variant {variant!r}")
        kwargs = {}
        if tail:
            for item in tail.split(","):
                key, sep, value = item.partition("=")
                key = key.strip()
                if not sep or key not in _FIELDS[variant]:
                    raise ParameterError(
                        f"bad field {item!r} for encoding {variant!r}")
                attr = {"k": "k", "m": "steps", "M": "order", "d": "dim",
                        "l1": "l1", "l2": "l2"}[key]
                kwargs[attr] = float(value) if key in ("l1", "l2") else int(value)
        return cls(variant=variant, **kwargs)

    @property
    def name(self) -> str:
        """Canonical string form, parseable back into an equal spec."""
        attr = {"k": self.k, "m": self.steps, "M": self.order,
                "d": self.dim, "l1": self.l1, "l2": self.l2}
        parts = []
        for key in _FIELDS[self.variant]:
            if key in ("l1", "l2") and attr[key] == 0.0:
                continue
            parts.append(f"{key}={attr[key]:g}" if key in ("l1", "l2")
                         else f"{key}={attr[key]}")
        return self.variant + (":" + ",".join(parts) if parts else "")

    def pe_width(self, n: int) -> int:
        """Encoding width for a graph with n nodes."""
        return {"nope": 0, "lpe-fk": self.k, "lpe-flk": 2 * self.k,
                "lpe-full": n, "rwse": self.steps, "llpe": self.dim,
                "llpe-large": self.dim}[self.variant]


@dataclass
class LlpeParams:
    """Learnable coefficient matrix Theta, shape (order+1, dim).

    Column j holds the Chebyshev coefficients of the filter applied to
    the shifted eigenvalues for output dimension j.
    """

    theta: np.ndarray

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=np.float64)
        if self.theta.ndim != 2:
            raise ParameterError("theta must be a 2-d matrix")
        if not np.isfinite(self.theta).all():
            raise ParameterError("theta entries must be finite")

    @property
    def order(self) -> int:
        return self.theta.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.theta.shape[1]

    @classmethod
    def init(cls, order: int, dim: int, seed: int = 0) -> "LlpeParams":
        # std 0.1/sqrt(order+1) keeps initial filter columns at O(0.1) norm
        rng = np.random.default_rng(seed)
        scale = 0.1 / np.sqrt(order + 1)
        return cls(theta=rng.standard_normal((order + 1, dim)) * scale)

    def save_csv(self, path) -> None:
        np.savetxt(path, self.theta, delimiter=",")

    @classmethod
    def load_csv(cls, path) -> "LlpeParams":
        theta = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
        return cls(theta=theta)


@dataclass
class PositionalEncoding:
    """An n x width encoding matrix plus the spec that produced it."""

    matrix: np.ndarray
    spec: EncodingSpec

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        if self.matrix.ndim != 2:
            raise ParameterError("encoding matrix must be 2-d")
        if not np.isfinite(self.matrix).all():
            raise ParameterError("encoding matrix must be finite")

    @property
    def width(self) -> int:
        return self.matrix.shape[1]


def _shifted_basis(spectrum: SpectralDecomposition, order: int) -> np.ndarray:
    return cheb_basis(normalize_eigenvalues(spectrum.eigenvalues), order)


def llpe_forward(spectrum: SpectralDecomposition, params: LlpeParams) -> PositionalEncoding:
    """P = U (B Theta) over whatever eigenpairs the spectrum retains."""
    basis = _shifted_basis(spectrum, params.order)
    matrix = spectrum.eigenvectors @ (basis @ params.theta)
    spec = EncodingSpec(variant="llpe", order=params.order, dim=params.dim)
    return PositionalEncoding(matrix=matrix, spec=spec)


def llpe_grad(spectrum: SpectralDecomposition, params: LlpeParams,
              upstream: np.ndarray) -> np.ndarray:
    """Gradient of any scalar loss wrt Theta given dL/dP.

    P = U B Theta is linear in Theta, so dL/dTheta = B^T (U^T dL/dP).
    """
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape != (spectrum.n, params.dim):
        raise ParameterError(
            f"upstream shape {upstream.shape} != {(spectrum.n, params.dim)}")
    basis = _shifted_basis(spectrum, params.order)
    return basis.T @ (spectrum.eigenvectors.T @ upstream)


def reg_penalty(params: LlpeParams, spectrum: SpectralDecomposition,
                l1: float, l2: float) -> tuple[float, np.ndarray]:
    """Column penalty on the realized filter matrix W = B Theta.

    penalty = sum_j l1*||W[:,j]||_1 + l2*||W[:,j]||_2^2.  Returns the
    scalar and its gradient wrt Theta; the l1 subgradient is 0 at
    exact zeros.
    """
    if l1 < 0 or l2 < 0:
        raise ParameterError("l1 and l2 must be >= 0")
    basis = _shifted_basis(spectrum, params.order)
    weights = basis @ params.theta
    penalty = l1 * np.abs(weights).sum() + l2 * (weights ** 2).sum()
    grad_w = l1 * np.sign(weights) + 2.0 * l2 * weights
    return float(penalty), basis.T @ grad_w


def rwse(graph: Graph, steps: int) -> np.ndarray:
    """Return-probability features: column s-1 = diag((D^-1 A)^s).

    Isolated nodes have no walk; their rows are zero and a warning is
    emitted naming how many there are.
    """
    if steps < 1:
        raise ParameterError("steps must be >= 1")
    degrees = graph.degrees
    isolated = int((degrees == 0).sum())
    if isolated:
        warnings.warn(f"{isolated} isolated nodes get zero rwse rows")
    with np.errstate(divide="ignore"):
        inv_deg = np.where(degrees > 0, 1.0 / degrees, 0.0)
    walk = sp.diags(inv_deg) @ graph.adjacency()
    out = np.zeros((graph.n, steps))
    power = walk.copy()
    for s in range(steps):
        out[:, s] = power.diagonal()
        if s + 1 < steps:
            power = power @ walk
    return out


def _nontrivial_small(spectrum: SpectralDecomposition, k: int) -> np.ndarray:
    """First k small-end eigenvectors after skipping every zero eigenvalue."""
    avail = spectrum.num_pairs if spectrum.kind == "full" else spectrum.k_small
    vals = spectrum.eigenvalues[:avail]
    keep = np.flatnonzero(vals > ZERO_EIG_TOL)
    if keep.size < k:
        raise ConfigurationError(
            f"need {k} nontrivial small-end eigenvectors, "
            f"only {keep.size} retained; decompose with a larger k_small")
    return spectrum.eigenvectors[:, keep[:k]]


def _extremal_slice(spectrum: SpectralDecomposition, k: int) -> SpectralDecomposition:
    """Restrict any decomposition to its first k and last k eigenpairs."""
    if spectrum.kind == "full":
        if spectrum.num_pairs < 2 * k:
            raise ConfigurationError(f"spectrum has fewer than {2 * k} pairs")
    elif spectrum.k_small < k or spectrum.k_large < k:
        raise ConfigurationError(
            f"extremal spectrum retains ({spectrum.k_small},{spectrum.k_large}) "
            f"pairs, need ({k},{k})")
    vals_s, vecs_s = spectrum.smallest(k)
    vals_l, vecs_l = spectrum.largest(k)
    return SpectralDecomposition(
        eigenvalues=np.concatenate([vals_s, vals_l]),
        eigenvectors=np.hstack([vecs_s, vecs_l]),
        kind="extremal", tol=spectrum.tol, k_small=k, k_large=k)


def build_encoding(spec: EncodingSpec, graph: Graph | None = None,
                   spectrum: SpectralDecomposition | None = None,
                   params: LlpeParams | None = None) -> PositionalEncoding:
    """Assemble the encoding named by `spec` from the available inputs.

    Spectrum-based variants need a decomposition of matching kind and
    size; rwse needs the graph; the learnable variants need params.
    """
    if graph is None and spectrum is None:
        raise ConfigurationError("need a graph or a spectrum")
    n = graph.n if graph is not None else spectrum.n
    if spectrum is not None and spectrum.n != n:
        raise ConfigurationError("graph and spectrum disagree on n")

    if spec.variant == "nope":
        return PositionalEncoding(matrix=np.zeros((n, 0)), spec=spec)
    if spec.variant == "rwse":
        if graph is None:
            raise ConfigurationError("rwse needs the graph")
        return PositionalEncoding(matrix=rwse(graph, spec.steps), spec=spec)

    if spectrum is None:
        raise ConfigurationError(f"{spec.variant} needs a spectrum")
    if spec.variant == "lpe-fk":
        return PositionalEncoding(matrix=_nontrivial_small(spectrum, spec.k),
                                  spec=spec)
    if spec.variant == "lpe-flk":
        small = _nontrivial_small(spectrum, spec.k)
        _, large = spectrum.largest(spec.k)
        return PositionalEncoding(matrix=np.hstack([small, large]), spec=spec)
    if spec.variant == "lpe-full":
        if spectrum.kind != "full":
            raise ConfigurationError("lpe-full needs a full decomposition")
        return PositionalEncoding(matrix=spectrum.eigenvectors.copy(), spec=spec)

    # learnable variants
    if params is None:
        raise ConfigurationError(f"{spec.variant} needs LlpeParams")
    if params.order != spec.order or params.dim != spec.dim:
        raise ConfigurationError(
            f"params shape {params.theta.shape} does not match spec "
            f"(order={spec.order}, dim={spec.dim})")
    if spec.variant == "llpe":
        if spectrum.kind != "full":
            raise ConfigurationError("llpe needs a full decomposition")
        pe = llpe_forward(spectrum, params)
    else:
        pe = llpe_forward(_extremal_slice(spectrum, spec.k), params)
    return PositionalEncoding(matrix=pe.matrix, spec=spec)

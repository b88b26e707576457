"""Eigendecomposition of symmetric graph operators.

Two routes: a dense full decomposition (LAPACK) capped at moderate n,
and a Lanczos iteration with full reorthogonalization, thick restarts
and locking for the extremal part of large sparse spectra.  Both apply
the same deterministic eigenvector sign convention so results are
comparable across solvers and runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import CapacityError, ConvergenceError, ParameterError

DENSE_CAP = 8192
SIGN_TOL = 1e-12
ZERO_EIG_TOL = 1e-8


@dataclass
class SpectralDecomposition:
    """Eigenpairs of a symmetric operator, eigenvalues ascending.

    kind is "full" (all n pairs) or "extremal" (k_small smallest pairs
    followed by k_large largest).  tol records the residual tolerance
    the solver guaranteed: ||L u - lambda u|| <= tol * (1 + |lambda|).
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    kind: str
    tol: float
    k_small: int = 0
    k_large: int = 0

    @property
    def n(self):
        return self.eigenvectors.shape[0]

    @property
    def num_pairs(self):
        return self.eigenvalues.size

    def smallest(self, count):
        """The `count` smallest retained eigenpairs."""
        avail = self.num_pairs if self.kind == "full" else self.k_small
        if count > avail:
            raise ParameterError(f"only {avail} small-end eigenpairs retained")
        return self.eigenvalues[:count], self.eigenvectors[:, :count]

    def largest(self, count):
        """The `count` largest retained eigenpairs."""
        avail = self.num_pairs if self.kind == "full" else self.k_large
        if count > avail:
            raise ParameterError(f"only {avail} large-end eigenpairs retained")
        return self.eigenvalues[-count:], self.eigenvectors[:, -count:]


def normalize_signs(vectors):
    """Flip eigenvector columns so the first entry over 1e-12 is positive."""
    vectors = np.asarray(vectors)
    if vectors.size == 0:
        return vectors
    big = np.abs(vectors) > SIGN_TOL
    first = big.argmax(axis=0)
    lead = vectors[first, np.arange(vectors.shape[1])]
    flip = np.where(lead < 0, -1.0, 1.0)
    # columns with no entry over the cutoff are left alone
    flip[~big.any(axis=0)] = 1.0
    return vectors * flip


def _as_dense(operator):
    if sp.issparse(operator):
        return operator.toarray()
    return np.asarray(operator, dtype=np.float64)


def full_eigh(operator, cap=DENSE_CAP):
    """Dense symmetric eigendecomposition, refused above `cap` nodes."""
    if operator.shape[0] != operator.shape[1]:
        raise ParameterError("operator must be square")
    n = operator.shape[0]
    if n > cap:
        raise CapacityError(
            f"dense solve of n={n} exceeds cap {cap}; use extremal_eigs instead")
    vals, vecs = np.linalg.eigh(_as_dense(operator))
    return SpectralDecomposition(eigenvalues=vals, eigenvectors=normalize_signs(vecs),
                                 kind="full", tol=1e-8)


def canonicalize_kernel(spectrum, degrees):
    """Rewrite a multi-dimensional zero eigenspace in a canonical basis.

    Any orthonormal basis of the kernel is a valid eigendecomposition, and
    dense solvers pick one that localizes on connected components.  Filters
    weight every kernel vector identically, so that arbitrary choice decides
    whether their sum carries component contrasts or collapses onto the
    all-ones direction.  This fixes the basis to: the degree-scaled constant
    (plus one indicator per isolated node), then contrasts ordered by the
    volume they separate.  Spans, eigenvalues, and everything outside the
    kernel are untouched; single-vector kernels return unchanged.
    """
    degrees = np.asarray(degrees, dtype=np.float64)
    if degrees.shape != (spectrum.n,):
        raise ParameterError("degrees must have one entry per node")
    avail = spectrum.num_pairs if spectrum.kind == "full" else spectrum.k_small
    zero = np.flatnonzero(spectrum.eigenvalues[:avail] <= ZERO_EIG_TOL)
    if zero.size <= 1:
        return spectrum
    kernel = spectrum.eigenvectors[:, zero]
    trivial = [np.sqrt(degrees)]
    for i in np.flatnonzero(degrees == 0):
        e = np.zeros(spectrum.n)
        e[i] = 1.0
        trivial.append(e)
    t = np.stack(trivial, axis=1)
    t /= np.linalg.norm(t, axis=0)
    # keep only the trivial directions actually inside the computed kernel
    proj = kernel @ (kernel.T @ t)
    q, r = np.linalg.qr(proj)
    lead = q[:, np.abs(np.diag(r)) > 1e-8]
    resid = kernel - lead @ (lead.T @ kernel)
    u, s, _ = np.linalg.svd(resid, full_matrices=False)
    contrasts = u[:, s > 1e-8]
    if contrasts.shape[1] > 1:
        vol = contrasts.T @ (degrees[:, None] * contrasts)
        w, rot = np.linalg.eigh(vol)
        contrasts = contrasts @ rot[:, ::-1]
    basis = np.hstack([lead, contrasts])
    if basis.shape[1] != zero.size:
        raise ConvergenceError(
            "kernel basis canonicalization lost rank; the zero eigenspace "
            "is inaccurate at the 1e-8 level")
    vectors = spectrum.eigenvectors.copy()
    vectors[:, zero] = normalize_signs(basis)
    return SpectralDecomposition(
        eigenvalues=spectrum.eigenvalues, eigenvectors=vectors,
        kind=spectrum.kind, tol=spectrum.tol,
        k_small=spectrum.k_small, k_large=spectrum.k_large)


def normalize_eigenvalues(eigenvalues, tol=1e-6):
    """Shift Laplacian eigenvalues into Chebyshev domain: clamp(lambda - 1).

    Inputs must lie in [-tol, 2 + tol]; the shifted values are clamped
    to [-1, 1] exactly so downstream polynomial evaluation is safe.
    """
    lam = np.asarray(eigenvalues, dtype=np.float64)
    if lam.size and (lam.min() < -tol or lam.max() > 2.0 + tol):
        raise ParameterError(
            f"eigenvalues outside [0, 2] by more than tol={tol}: "
            f"range [{lam.min()}, {lam.max()}]")
    return np.clip(lam - 1.0, -1.0, 1.0)


def operator_norm(operator, tol=1e-6, max_iter=10_000, seed=0):
    """Largest |eigenvalue| of a symmetric operator by power iteration.

    `operator` is anything supporting @ with a vector (ndarray, sparse
    matrix, LinearOperator).  Raises ConvergenceError when the relative
    change of the estimate stays above tol for max_iter steps.
    """
    n = operator.shape[0]
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    est = prev = np.inf
    for _ in range(max_iter):
        w = operator @ v
        est = float(np.linalg.norm(w))
        if est == 0.0:
            return 0.0
        v = w / est
        if np.isfinite(prev) and abs(est - prev) <= tol * est:
            return est
        prev = est
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} steps",
        residuals=[abs(est - prev)])


# ---------------------------------------------------------------------------
# Lanczos with full reorthogonalization, thick restart, locking
# ---------------------------------------------------------------------------

class _SmallestEndSolver:
    """Converges the k smallest eigenpairs of a symmetric operator.

    The active basis V stays fully orthogonal (two Gram-Schmidt passes
    per expansion) against itself and against locked converged
    eigenvectors, and the projected matrix H = V^T L V is maintained
    explicitly, which makes thick restarts trivial: kept Ritz vectors
    restart with H = diag(theta).  Residuals use the exact relation
    L V = V H + f e_m^T, so pair (theta, V y) has residual
    ||f|| * |y[m-1]|.

    A single Krylov sequence cannot see eigenvalue multiplicities, so
    after k pairs lock, a verification round restarts from a fresh
    random vector and converges the smallest remaining Ritz pair; if
    that dives below the locked set (a missed copy inside a degenerate
    cluster, e.g. the kernel of a disconnected graph's Laplacian) it
    swaps in and verification repeats.
    """

    def __init__(self, matvec, n, k, tol, max_matvec, rng, ncv):
        self.matvec = matvec
        self.n = n
        self.k = k
        self.tol = tol
        self.max_matvec = max_matvec
        self.rng = rng
        self.ncv = int(min(n, max(ncv, k + 2)))
        self.locked_vals = []
        self.locked_vecs = np.empty((n, 0))
        self.V = np.empty((n, self.ncv))
        self.H = np.zeros((self.ncv, self.ncv))
        self.m = 0
        self.matvecs = 0
        self.best_residuals = None

    # -- vector plumbing ----------------------------------------------------

    def _project_out(self, w, upto=None):
        upto = self.m if upto is None else upto
        for _ in range(2):
            if self.locked_vecs.shape[1]:
                w = w - self.locked_vecs @ (self.locked_vecs.T @ w)
            if upto:
                w = w - self.V[:, :upto] @ (self.V[:, :upto].T @ w)
        return w

    def _fresh_direction(self, upto):
        for _ in range(40):
            w = self._project_out(self.rng.standard_normal(self.n), upto)
            norm = np.linalg.norm(w)
            if norm > 1e-8:
                return w / norm
        raise ConvergenceError("no direction left outside the converged subspace")

    def _fresh_start(self):
        self.H[:, :] = 0.0
        self.m = 0
        self.V[:, 0] = self._fresh_direction(0)
        self.m = 1

    def _lock(self, value, vector):
        u = vector
        if self.locked_vecs.shape[1]:
            u = u - self.locked_vecs @ (self.locked_vecs.T @ u)
        norm = np.linalg.norm(u)
        if norm < 1e-8:
            return
        self.locked_vecs = np.column_stack([self.locked_vecs, u / norm])
        self.locked_vals.append(float(value))

    def _drop_locked_max(self):
        worst = int(np.argmax(self.locked_vals))
        self.locked_vals.pop(worst)
        self.locked_vecs = np.delete(self.locked_vecs, worst, axis=1)

    # -- one restart cycle ----------------------------------------------------

    def _expand_and_ritz(self):
        """Grow the basis to ncv (or an invariant subspace), Rayleigh-Ritz.

        Returns (theta, X, resid, exact, f, fnorm) with theta ascending
        and X the orthonormal Ritz vectors.  `exact` means the basis
        spans an invariant subspace so every pair is an eigenpair.
        """
        while True:
            if self.matvecs >= self.max_matvec:
                raise ConvergenceError(
                    f"Lanczos budget of {self.max_matvec} matvecs exhausted with "
                    f"{self.k - len(self.locked_vals)} pair(s) outstanding",
                    residuals=self.best_residuals)
            j = self.m - 1
            w = self.matvec(self.V[:, j])
            self.matvecs += 1
            h = np.zeros(self.m)
            for _ in range(2):
                if self.locked_vecs.shape[1]:
                    w = w - self.locked_vecs @ (self.locked_vecs.T @ w)
                proj = self.V[:, :self.m].T @ w
                h += proj
                w = w - self.V[:, :self.m] @ proj
            self.H[:self.m, j] = h
            fnorm = float(np.linalg.norm(w))
            exhausted = self.m + len(self.locked_vals) >= self.n
            if self.m < self.ncv and fnorm > 1e-13 and not exhausted:
                self.V[:, self.m] = w / fnorm
                self.m += 1
                continue
            m = self.m
            Hm = np.triu(self.H[:m, :m])
            Hm = Hm + np.triu(Hm, 1).T
            theta, Y = np.linalg.eigh(Hm)
            exact = fnorm <= 1e-13 or exhausted
            resid = np.zeros(m) if exact else fnorm * np.abs(Y[m - 1, :])
            X = self.V[:, :m] @ Y
            return theta, X, resid, exact, w, fnorm

    def _thick_restart(self, theta, X, skip, budget, f, fnorm):
        """Restart the basis with Ritz vectors skip..skip+keep-1 plus the
        residual direction, so accumulated convergence is not thrown away."""
        keep = int(min(budget, self.ncv - 2, theta.size - skip))
        if keep <= 0 or fnorm <= 1e-13:
            self._fresh_start()
            return
        self.V[:, :keep] = X[:, skip: skip + keep]
        self.H[:, :] = 0.0
        self.H[np.arange(keep), np.arange(keep)] = theta[skip: skip + keep]
        self.m = keep
        nxt = self._project_out(f / fnorm, keep)
        nn = np.linalg.norm(nxt)
        if nn > 1e-8:
            self.V[:, keep] = nxt / nn
            self.m = keep + 1
        elif keep + len(self.locked_vals) < self.n:
            self.V[:, keep] = self._fresh_direction(keep)
            self.m = keep + 1
        # else: the kept block spans everything that is left; the next
        # expansion hits the exhaustion path and finishes exactly

    # -- driver ---------------------------------------------------------------

    def solve(self):
        if self.k == 0:
            return np.empty(0), np.empty((self.n, 0))
        if self.k > self.n:
            raise ParameterError(f"requested {self.k} eigenpairs of an n={self.n} operator")
        self._fresh_start()
        while len(self.locked_vals) < self.k:
            theta, X, resid, exact, f, fnorm = self._expand_and_ritz()
            remaining = self.k - len(self.locked_vals)
            self.best_residuals = np.sort(resid)[:remaining].tolist()
            conv = resid <= self.tol * (1.0 + np.abs(theta))
            newly = 0
            while (newly < theta.size and conv[newly]
                   and len(self.locked_vals) < self.k):
                self._lock(theta[newly], X[:, newly])
                newly += 1
            if len(self.locked_vals) >= self.k:
                break
            if exact:
                self._fresh_start()
            else:
                budget = max(remaining + 8, self.ncv // 3)
                self._thick_restart(theta, X, newly, budget, f, fnorm)
        self._verify()
        order = np.argsort(self.locked_vals)
        return np.asarray(self.locked_vals)[order], self.locked_vecs[:, order]

    def _verify(self):
        """Certify no eigenvalue below max(locked) was missed; swap if one was."""
        while len(self.locked_vals) < self.n:
            locked_max = max(self.locked_vals)
            margin = max(10.0 * self.tol * (1.0 + abs(locked_max)), 1e-11)
            self._fresh_start()
            while True:
                theta, X, resid, exact, f, fnorm = self._expand_and_ritz()
                if resid[0] <= self.tol * (1.0 + abs(theta[0])):
                    value, vector = float(theta[0]), X[:, 0]
                    break
                self._thick_restart(theta, X, 0, 8, f, fnorm)
            if value >= locked_max - margin:
                return
            self._drop_locked_max()
            self._lock(value, vector)


def extremal_eigs(operator, k_small, k_large, tol=1e-6, max_matvec=500_000,
                  seed=0, ncv=None):
    """Extremal eigenpairs of a symmetric operator with spectrum in [0, 2].

    The k_small smallest pairs come from Lanczos on L directly; the
    k_large largest reuse the same routine on 2I - L and map back.
    Deterministic given (operator, seed).  Raises ConvergenceError with
    the best residuals achieved when the matvec budget runs out.
    """
    n = operator.shape[0]
    if k_small < 0 or k_large < 0 or k_small + k_large == 0:
        raise ParameterError("need k_small >= 0, k_large >= 0, and at least one > 0")
    if k_small + k_large > n:
        raise ParameterError(f"k_small + k_large = {k_small + k_large} exceeds n = {n}")
    if sp.issparse(operator):
        op = operator.tocsr()
    else:
        op = np.asarray(operator, dtype=np.float64)
    matvec_small = lambda x: op @ x
    matvec_large = lambda x: 2.0 * x - op @ x
    rng = np.random.default_rng(seed)
    if ncv is None:
        ncv = max(2 * max(k_small, k_large) + 16, 40)
    vals_s, vecs_s = _SmallestEndSolver(
        matvec_small, n, k_small, tol, max_matvec, rng, ncv).solve()
    vals_l, vecs_l = _SmallestEndSolver(
        matvec_large, n, k_large, tol, max_matvec, rng, ncv).solve()
    # 2I - L maps the top of the spectrum to the bottom; undo and re-sort
    vals_l = 2.0 - vals_l
    order = np.argsort(vals_l)
    vals = np.concatenate([vals_s, vals_l[order]])
    vecs = np.column_stack([vecs_s, vecs_l[:, order]])
    return SpectralDecomposition(eigenvalues=vals, eigenvectors=normalize_signs(vecs),
                                 kind="extremal", tol=tol,
                                 k_small=k_small, k_large=k_large)


# ---------------------------------------------------------------------------
# debugging CSV dump
# ---------------------------------------------------------------------------

def save_spectrum_csv(dec, path):
    """Eigenvalues on the first row, then one row per node with the
    eigenvector components as columns."""
    with open(path, "w") as fh:
        fh.write(",".join(repr(float(v)) for v in dec.eigenvalues) + "\n")
        for row in dec.eigenvectors:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def load_spectrum_csv(path, kind="full", tol=1e-8, k_small=0, k_large=0):
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    vals = np.asarray([float(x) for x in lines[0].split(",")])
    vecs = np.asarray([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    return SpectralDecomposition(eigenvalues=vals, eigenvectors=vecs, kind=kind,
                                 tol=tol, k_small=k_small, k_large=k_large)

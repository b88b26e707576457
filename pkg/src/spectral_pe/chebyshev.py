"""Chebyshev polynomials of the first kind on [-1, 1].

Everything downstream (spectral filters, learned encodings, capacity
estimates) runs through the basis matrix built here with the three-term
recurrence T_{m+1}(x) = 2x T_m(x) - T_{m-1}(x).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FittingError, ParameterError

DOMAIN_SLACK = 1e-9


def _clamp_domain(x):
    x = np.asarray(x, dtype=np.float64)
    if x.size and (x.min() < -1.0 - DOMAIN_SLACK or x.max() > 1.0 + DOMAIN_SLACK):
        raise ParameterError(
            f"Chebyshev argument outside [-1, 1]: range [{x.min()}, {x.max()}]")
    return np.clip(x, -1.0, 1.0)


def cheb_basis(x, order):
    """Evaluate T_0..T_order at x.

    Parameters
    ----------
    x : scalar or array, values in [-1, 1] (up to 1e-9 slack, clamped)
    order : int, highest polynomial degree M

    Returns
    -------
    (..., order + 1) array; for scalar x a vector of length order + 1.
    """
    if order < 0:
        raise ParameterError("order must be >= 0")
    scalar = np.isscalar(x) or np.ndim(x) == 0
    x = np.atleast_1d(_clamp_domain(x))
    out = np.empty(x.shape + (order + 1,))
    out[..., 0] = 1.0
    if order >= 1:
        out[..., 1] = x
    for m in range(2, order + 1):
        out[..., m] = 2.0 * x * out[..., m - 1] - out[..., m - 2]
    return out[0] if scalar else out


def monic_scale(m):
    """1 / leading coefficient of T_m: T_m / 2^{m-1} is monic for m >= 1."""
    return 1.0 if m == 0 else 2.0 ** (1 - m)


def monic_cheb_basis(x, order):
    """Monic-normalized basis: column m is T_m(x) / 2^{m-1} (T_0 kept at 1).

    The sup norm of column m over [-1, 1] is exactly 2^{1-m} for m >= 1,
    which is what makes these the minimal-deviation monic polynomials.
    """
    scales = np.array([monic_scale(m) for m in range(order + 1)])
    return cheb_basis(x, order) * scales


@dataclass(frozen=True)
class ChebyshevSeries:
    """A finite expansion f(x) = sum_m coeffs[m] * T_m(x)."""

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=np.float64))
        if self.coeffs.ndim != 1 or self.coeffs.size == 0:
            raise ParameterError("coeffs must be a non-empty 1-d array")

    @property
    def order(self):
        return self.coeffs.size - 1

    def __call__(self, x):
        return cheb_basis(x, self.order) @ self.coeffs


def cheb_fit(f, order, method="quadrature", grid=None):
    """Project a function on [-1, 1] onto T_0..T_order.

    method="quadrature" uses Chebyshev-Gauss quadrature on 4*(order+1)
    nodes; the discrete cosine orthogonality makes the projection exact
    for polynomial inputs of degree <= order.  method="least_squares"
    solves the overdetermined Vandermonde system on `grid` (default: a
    uniform grid of the same size).

    Returns a ChebyshevSeries whose coefficients multiply plain T_m,
    i.e. the conventional halving of the m=0 projection is already
    folded in.
    """
    if order < 0:
        raise ParameterError("order must be >= 0")
    num = 4 * (order + 1)
    if method == "quadrature":
        theta = np.pi * (np.arange(num) + 0.5) / num
        x = np.cos(theta)
        fx = np.asarray(f(x), dtype=np.float64)
        if fx.shape != x.shape:
            raise ParameterError("f must be vectorized: f(x) with x.shape -> same shape")
        m = np.arange(order + 1)
        coeffs = (2.0 / num) * np.cos(np.outer(m, theta)) @ fx
        coeffs[0] *= 0.5
        return ChebyshevSeries(coeffs)
    if method == "least_squares":
        if grid is None:
            grid = np.linspace(-1.0, 1.0, num)
        grid = _clamp_domain(grid)
        design = cheb_basis(grid, order)
        fx = np.asarray(f(grid), dtype=np.float64)
        coeffs, _, rank, _ = np.linalg.lstsq(design, fx, rcond=None)
        if rank < order + 1:
            raise FittingError(
                f"sample grid of {grid.size} points is rank deficient for order {order}")
        return ChebyshevSeries(coeffs)
    raise ParameterError(f"unknown fit method {method!r}")

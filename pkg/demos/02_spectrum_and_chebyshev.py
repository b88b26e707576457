"""Laplacian eigensolvers and the Chebyshev toolkit that feeds the encodings.

The dense path computes every eigenpair; the iterative path pulls just
the extremes and must agree with it.  Chebyshev polynomials enter twice:
as the filter basis (in monic scaling, so high orders cannot blow up)
and as a generic function approximator on the shifted spectrum.
"""

import numpy as np

from spectral_pe import (cheb_basis, cheb_fit, extremal_eigs, full_eigh,
                         monic_cheb_basis, normalize_eigenvalues,
                         normalized_laplacian, sbm_from_homophily,
                         sbm_generate)

graph = sbm_generate(sbm_from_homophily(n=600, k=2, h=0.3, avg_degree=10.0),
                     seed=0)
lap = normalized_laplacian(graph)

dense = full_eigh(lap)
print(f"dense solve: {dense.num_pairs} pairs,"
      f" lambda range [{dense.eigenvalues[0]:.2e}, {dense.eigenvalues[-1]:.4f}]")

sparse = extremal_eigs(lap, k_small=6, k_large=6)
err_small = np.abs(sparse.smallest(6)[0] - dense.smallest(6)[0]).max()
err_large = np.abs(sparse.largest(6)[0] - dense.largest(6)[0]).max()
print(f"lanczos vs dense: smallest 6 within {err_small:.2e},"
      f" largest 6 within {err_large:.2e}")

# filters act on the spectrum shifted to [-1, 1]
shifted = normalize_eigenvalues(dense.eigenvalues)
print(f"shifted spectrum in [{shifted.min():.3f}, {shifted.max():.3f}]")

# monic scaling: column m carries 2^(1-m) T_m, so its sup norm decays
# geometrically instead of staying at 1
x = np.linspace(-1, 1, 4001)
sups = np.abs(monic_cheb_basis(x, 8)).max(axis=0)
print("sup |T~_m| for m=0..8:", " ".join(f"{s:.4f}" for s in sups))

# plain basis recurrence at a point, against the closed form cos(m acos x)
vals = cheb_basis(np.array([0.3]), 10)[0]
closed = np.cos(np.arange(11) * np.arccos(0.3))
print(f"recurrence vs cos-form at x=0.3: max diff {np.abs(vals - closed).max():.2e}")

# quadrature projection of a smooth kernel; error collapses with order
f = lambda x: np.exp(-2.0 * (x + 1.0))
for order in (4, 8, 16, 32):
    series = cheb_fit(f, order)
    err = np.abs(series(x) - f(x)).max()
    print(f"cheb_fit order {order:2d}: max error {err:.2e}")

"""Spectral distances, the bump compilation of kernels, and the MC oracle."""

import numpy as np
import pytest
import scipy.stats

from spectral_pe import (
    ChebyshevSeries,
    KernelError,
    ParameterError,
    ReachabilityError,
    SpectralKernel,
    bump_llpe_construct,
    commute_mc_oracle,
    extremal_eigs,
    full_eigh,
    llpe_forward,
    normalized_laplacian,
    sbm_generate,
    spectral_distance_matrix,
)
from spectral_pe.spectral import SpectralDecomposition

from conftest import graph_from_edges


def spectrum_of(graph):
    return full_eigh(normalized_laplacian(graph))


def encoding_gap_error(dec, kernel, order, c_max):
    """Max |squared encoding gap - f_r^2| over pairs, and max f_r^2."""
    ref = spectral_distance_matrix(dec, kernel).values ** 2
    params = bump_llpe_construct(dec, kernel, order, c_max=c_max)
    pe = llpe_forward(dec, params).matrix
    gram = pe @ pe.T
    diag = np.diag(gram)
    sq = diag[:, None] + diag[None, :] - 2.0 * gram
    return np.abs(sq - ref).max(), ref.max()


class TestKernels:
    def test_named_kernel_values(self):
        lam = np.array([0.5, 2.0])
        assert np.allclose(SpectralKernel("commute").evaluate(lam), [4.0, 0.25])
        assert np.allclose(SpectralKernel("biharmonic").evaluate(lam), [2.0, 0.5])
        assert np.allclose(SpectralKernel("diffusion", t=1.0).evaluate(lam),
                           np.exp([-1.0, -4.0]))
        assert np.allclose(SpectralKernel("highpass", t=1.0).evaluate(lam),
                           np.exp([-3.0, 0.0]))

    def test_diffusion_needs_positive_t(self):
        with pytest.raises(ParameterError):
            SpectralKernel("diffusion", t=0.0)

    def test_custom_needs_series(self):
        with pytest.raises(ParameterError):
            SpectralKernel("custom")

    def test_negative_custom_kernel_rejected(self):
        kernel = SpectralKernel("custom", series=ChebyshevSeries([0.0, 1.0]))
        with pytest.raises(KernelError):
            kernel.evaluate(np.array([0.5]))


class TestDistanceMatrix:
    def test_k2_biharmonic(self, k2):
        dist = spectral_distance_matrix(spectrum_of(k2),
                                        SpectralKernel("biharmonic"))
        assert dist.values[0, 1] == pytest.approx(1.0, abs=1e-10)

    def test_k2_commute_squared(self, k2):
        dist = spectral_distance_matrix(spectrum_of(k2),
                                        SpectralKernel("commute"))
        assert dist.values[0, 1] ** 2 == pytest.approx(0.5, abs=1e-10)

    def test_zero_diagonal_and_symmetry(self, cubic20):
        dist = spectral_distance_matrix(spectrum_of(cubic20),
                                        SpectralKernel("diffusion", t=0.5))
        assert not np.diag(dist.values).any()
        assert np.array_equal(dist.values, dist.values.T)

    def test_invariant_to_basis_choice_in_degenerate_blocks(self, k22):
        # K_{2,2} has a twofold eigenvalue at 1: rotate that block and
        # flip the signs of the rest, distances must not move
        dec = spectrum_of(k22)
        assert dec.eigenvalues[1] == pytest.approx(dec.eigenvalues[2])
        rng = np.random.default_rng(0)
        angle = rng.uniform(0, 2 * np.pi)
        rot = np.array([[np.cos(angle), -np.sin(angle)],
                        [np.sin(angle), np.cos(angle)]])
        vecs = dec.eigenvectors.copy()
        vecs[:, 1:3] = vecs[:, 1:3] @ rot
        vecs[:, 0] *= -1
        vecs[:, 3] *= -1
        remixed = SpectralDecomposition(eigenvalues=dec.eigenvalues,
                                        eigenvectors=vecs, kind="full",
                                        tol=dec.tol)
        kernel = SpectralKernel("diffusion", t=1.0)
        a = spectral_distance_matrix(dec, kernel).values
        b = spectral_distance_matrix(remixed, kernel).values
        assert np.abs(a - b).max() <= 1e-8

    def test_diffusion_monotone_in_t(self, cubic20):
        dec = spectrum_of(cubic20)
        prev = None
        for t in (0.25, 0.5, 1.0, 2.0, 4.0):
            cur = spectral_distance_matrix(
                dec, SpectralKernel("diffusion", t=t)).values
            if prev is not None:
                assert (cur <= prev + 1e-12).all()
            prev = cur

    def test_extremal_spectrum_flagged_approximate(self, cubic20):
        dec = extremal_eigs(normalized_laplacian(cubic20), 3, 3)
        dist = spectral_distance_matrix(dec, SpectralKernel("diffusion", t=1.0))
        assert dist.approximate

    def test_csv_export(self, p4, tmp_path):
        dist = spectral_distance_matrix(spectrum_of(p4),
                                        SpectralKernel("biharmonic"))
        path = tmp_path / "dist.csv"
        dist.save_csv(path)
        back = np.loadtxt(path, delimiter=",")
        assert np.allclose(back, dist.values, atol=1e-15)


class TestBumpConstruct:
    def test_k2_biharmonic_matches_distance(self, k2):
        dec = spectrum_of(k2)
        err, _ = encoding_gap_error(dec, SpectralKernel("biharmonic"),
                                    order=64, c_max=200.0)
        assert err <= 1e-2

    def test_zero_kernel_gives_zero_encoding(self, p4):
        dec = spectrum_of(p4)
        kernel = SpectralKernel("custom", series=ChebyshevSeries([0.0]))
        params = bump_llpe_construct(dec, kernel, order=16)
        assert not params.theta.any()
        assert not llpe_forward(dec, params).matrix.any()

    @pytest.mark.parametrize("kernel", [SpectralKernel("diffusion", t=1.0),
                                        SpectralKernel("biharmonic")])
    def test_error_decreases_with_order(self, cubic20, kernel):
        dec = spectrum_of(cubic20)
        with pytest.warns(UserWarning, match="gap"):
            errs = [encoding_gap_error(dec, kernel, order, c_max=1000.0)[0]
                    for order in (32, 64, 128)]
        assert errs[0] > errs[1] > errs[2]

    def test_close_eigenvalues_draw_warning(self, cubic20):
        dec = spectrum_of(cubic20)
        with pytest.warns(UserWarning, match="gap"):
            bump_llpe_construct(dec, SpectralKernel("diffusion", t=1.0),
                                order=32, c_max=200.0)

    def test_refuses_extremal_spectrum(self, cubic20):
        dec = extremal_eigs(normalized_laplacian(cubic20), 2, 2)
        with pytest.raises(ParameterError):
            bump_llpe_construct(dec, SpectralKernel("biharmonic"), order=16)

    def test_node_cap(self):
        graph = graph_from_edges(51, [(i, i + 1) for i in range(50)])
        with pytest.raises(ParameterError):
            bump_llpe_construct(spectrum_of(graph),
                                SpectralKernel("biharmonic"), order=16)


class TestCommuteMcOracle:
    def test_k2_forced_alternation(self, k2):
        est = commute_mc_oracle(k2, 0, 1, trials=50, seed=0)
        assert est.mean == 2.0
        assert est.stderr == 0.0
        assert est.truncated == 0

    def test_p3_endpoint_commute(self, p3):
        # effective resistance 2 on 2 edges: commute time 2*2*2 = 8
        est = commute_mc_oracle(p3, 0, 2, trials=2000, seed=0)
        assert abs(est.mean - 8.0) <= 4 * est.stderr

    def test_triangle_commute(self, triangle):
        # R_eff = 2/3 on 3 edges: commute time 2*3*(2/3) = 4
        est = commute_mc_oracle(triangle, 0, 1, trials=2000, seed=0)
        assert abs(est.mean - 4.0) <= 4 * est.stderr

    def test_truncation_reported(self, p3):
        est = commute_mc_oracle(p3, 0, 2, trials=200, max_steps=6, seed=0)
        assert est.truncated > 0
        assert est.trials + est.truncated == 200

    def test_same_node_rejected(self, p3):
        with pytest.raises(ParameterError):
            commute_mc_oracle(p3, 1, 1)

    def test_disconnected_pair_rejected(self):
        graph = graph_from_edges(4, [(0, 1), (2, 3)])
        with pytest.raises(ReachabilityError):
            commute_mc_oracle(graph, 0, 2, trials=10)


def test_commute_kernel_rank_agreement():
    """Kernel f_r orders node pairs like measured round-trip walk times."""
    from spectral_pe import sbm_from_homophily

    params = sbm_from_homophily(n=15, k=3, h=0.94, avg_degree=4.0)
    graph = sbm_generate(params, seed=132)
    dec = spectrum_of(graph)
    kernel_dist = spectral_distance_matrix(dec, SpectralKernel("commute")).values
    walked = []
    spectral = []
    for i in range(15):
        for j in range(i + 1, 15):
            est = commute_mc_oracle(graph, i, j, trials=800, seed=0)
            walked.append(est.mean)
            spectral.append(kernel_dist[i, j])
    rho = scipy.stats.spearmanr(spectral, walked).statistic
    assert rho >= 0.9

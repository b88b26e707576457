"""Splits, end-to-end training including the learnable encoding, quintiles."""

import warnings

import numpy as np
import pytest

from spectral_pe import (
    ClassifierConfig,
    ConfigurationError,
    EncodingSpec,
    ParameterError,
    TrainingError,
    canonicalize_kernel,
    cheb_basis,
    evaluate_by_quintile,
    full_eigh,
    normalize_eigenvalues,
    normalized_laplacian,
    split_nodes,
    train_node_classifier,
)
from spectral_pe.learner import Split, _Model

from conftest import binary_sbm, graph_from_edges


def canonical_spectrum(graph):
    dec = full_eigh(normalized_laplacian(graph))
    return canonicalize_kernel(dec, graph.degrees)


class TestSplitNodes:
    def test_exact_rounding(self):
        split = split_nodes(10, seed=0)
        assert (split.train.sum(), split.val.sum(), split.test.sum()) == (6, 2, 2)

    def test_remainder_distribution(self):
        split = split_nodes(5, seed=0)
        assert (split.train.sum(), split.val.sum(), split.test.sum()) == (3, 1, 1)

    def test_deterministic(self):
        a = split_nodes(100, seed=7)
        b = split_nodes(100, seed=7)
        assert np.array_equal(a.train, b.train)
        assert np.array_equal(a.val, b.val)
        assert np.array_equal(a.test, b.test)

    def test_masks_partition_nodes(self):
        split = split_nodes(33, seed=1)
        total = split.train.astype(int) + split.val.astype(int) + split.test.astype(int)
        assert (total == 1).all()

    def test_rejects_bad_fractions(self):
        with pytest.raises(ParameterError):
            split_nodes(10, fractions=(0.5, 0.5, 0.5))

    def test_split_type_rejects_overlap(self):
        mask = np.ones(4, dtype=bool)
        with pytest.raises(ParameterError):
            Split(train=mask, val=mask, test=~mask)


class TestTraining:
    def test_separable_features_reach_perfect_accuracy(self):
        graph = binary_sbm(0.5, n=100, seed=0, avg_degree=8.0,
                           mu=1.0, sigma=0.0)
        split = split_nodes(100, seed=2)
        cfg = ClassifierConfig(arch="linear", hidden=8, lr=0.1,
                               epochs=200, patience=200)
        result = train_node_classifier(graph, EncodingSpec.parse("nope"),
                                       split, cfg, seed=3)
        assert result.test_accuracy == 1.0

    def test_deterministic(self):
        graph = binary_sbm(0.8, n=120, seed=1, avg_degree=6.0)
        split = split_nodes(120, seed=3)
        cfg = ClassifierConfig(arch="mlp", hidden=16, lr=0.05,
                               epochs=60, patience=60)
        spec = EncodingSpec.parse("llpe:M=8,d=4")
        a = train_node_classifier(graph, spec, split, cfg, seed=4)
        b = train_node_classifier(graph, spec, split, cfg, seed=4)
        assert a.test_accuracy == b.test_accuracy
        assert a.best_epoch == b.best_epoch
        assert np.array_equal(a.theta.theta, b.theta.theta)

    def test_divergence_raises(self):
        graph = binary_sbm(0.5, n=40, seed=0, avg_degree=6.0,
                           mu=1.0, sigma=1.0)
        split = split_nodes(40, seed=0)
        cfg = ClassifierConfig(arch="linear", hidden=8, lr=1e100,
                               epochs=50, patience=50,
                               optimizer="sgd_momentum")
        with np.errstate(all="ignore"), warnings.catch_warnings():
            warnings.simplefilter("ignore")
            with pytest.raises(TrainingError, match="epoch"):
                train_node_classifier(graph, EncodingSpec.parse("nope"),
                                      split, cfg, seed=0)

    def test_needs_labels_and_cover(self):
        graph = binary_sbm(0.5, n=30, seed=0, avg_degree=4.0)
        with pytest.raises(ConfigurationError):
            train_node_classifier(graph, EncodingSpec.parse("nope"),
                                  split_nodes(29, seed=0),
                                  ClassifierConfig())

    def test_sage1_trains(self):
        graph = binary_sbm(1.0, n=200, seed=5, avg_degree=8.0,
                           mu=0.5, sigma=0.5)
        split = split_nodes(200, seed=7)
        cfg = ClassifierConfig(arch="sage1", hidden=16, lr=0.05,
                               epochs=100, patience=100)
        result = train_node_classifier(graph, EncodingSpec.parse("nope"),
                                       split, cfg, seed=8)
        assert result.test_accuracy >= 0.8

    def test_homophilous_lpe_fk_strong(self):
        # fixed eigenvector features carry the communities when h = 1
        graph = binary_sbm(1.0, n=2000, seed=0)
        split = split_nodes(2000, seed=2)
        cfg = ClassifierConfig(arch="mlp", hidden=64, lr=0.3,
                               epochs=800, patience=800)
        result = train_node_classifier(graph, EncodingSpec.parse("lpe-fk:k=16"),
                                       split, cfg, seed=3)
        assert result.test_accuracy >= 0.95

    def test_heterophilous_gap_over_ten_splits(self):
        # the learnable filter reaches the top of the spectrum; the
        # fixed first-k selection cannot, and the gap is large
        graph = binary_sbm(0.0, n=2000, seed=0)
        dec = canonical_spectrum(graph)
        cfg = ClassifierConfig(arch="mlp", hidden=64, lr=0.01,
                               epochs=500, patience=100)
        means = {}
        for enc in ("llpe:M=64,d=32,l1=0.001", "lpe-fk:k=16"):
            spec = EncodingSpec.parse(enc)
            accs = [train_node_classifier(graph, spec,
                                          split_nodes(2000, seed=s),
                                          cfg, seed=100 + s,
                                          spectrum=dec).test_accuracy
                    for s in range(10)]
            means[enc] = float(np.mean(accs))
        gap = means["llpe:M=64,d=32,l1=0.001"] - means["lpe-fk:k=16"]
        assert gap >= 0.20
        assert means["llpe:M=64,d=32,l1=0.001"] >= 0.9


class TestJointGradients:
    @pytest.mark.parametrize("arch", ["linear", "mlp", "sage1"])
    def test_all_parameter_gradients_match_fd(self, arch):
        graph = binary_sbm(0.5, n=20, seed=7, avg_degree=4.0,
                           dim=4, mu=1.0, sigma=1.0)
        dec = canonical_spectrum(graph)
        spec = EncodingSpec(variant="llpe", order=4, dim=3, l2=0.01)
        cfg = ClassifierConfig(arch=arch, hidden=8, lr=0.01,
                               weight_decay=0.01)
        model = _Model(graph, spec, cfg, num_classes=2, spectrum=dec, seed=11)
        mask = split_nodes(20, seed=1).train
        _, grads = model.loss_and_grads(model.params, mask)
        step = 1e-6
        for name, grad in grads.items():
            base = model.params[name]
            for idx in np.ndindex(base.shape):
                keep = base[idx]
                base[idx] = keep + step
                up = model.loss_and_grads(model.params, mask)[0]
                base[idx] = keep - step
                down = model.loss_and_grads(model.params, mask)[0]
                base[idx] = keep
                numeric = (up - down) / (2 * step)
                tol = 1e-4 * max(1.0, abs(numeric))
                assert abs(grad[idx] - numeric) <= tol, (name, idx)


class TestQuintileEvaluation:
    def test_perfect_predictions(self):
        graph = binary_sbm(0.5, n=500, seed=0, avg_degree=8.0)
        out = evaluate_by_quintile(graph, graph.labels)
        assert np.allclose(out, 1.0)

    def test_all_wrong_predictions(self):
        graph = binary_sbm(0.5, n=500, seed=0, avg_degree=8.0)
        out = evaluate_by_quintile(graph, 1 - graph.labels)
        assert np.allclose(out, 0.0)

    def test_majority_predictor_near_half(self):
        graph = binary_sbm(0.5, n=2000, seed=1)
        out = evaluate_by_quintile(graph, np.zeros(2000, dtype=np.int64))
        assert np.abs(out - 0.5).max() <= 0.1

    def test_small_graph_leaves_last_bucket_empty(self):
        graph = graph_from_edges(4, [(0, 1), (1, 2), (2, 3)],
                                 labels=np.array([0, 0, 1, 1]))
        out = evaluate_by_quintile(graph, np.array([0, 0, 1, 1]))
        assert np.isnan(out[4])
        assert np.nanmax(out) == 1.0


def test_l1_regularization_localizes_filters_on_heterophilous_graph():
    """Trained filter mass concentrates on the top eigenvalue decile."""
    graph = binary_sbm(0.0, n=2000, seed=0)
    dec = canonical_spectrum(graph)
    cfg = ClassifierConfig(arch="mlp", hidden=64, lr=0.01,
                           epochs=500, patience=100)
    spec = EncodingSpec.parse("llpe:M=64,d=32,l1=0.001")
    result = train_node_classifier(graph, spec, split_nodes(2000, seed=2),
                                   cfg, seed=3, spectrum=dec)
    basis = cheb_basis(normalize_eigenvalues(dec.eigenvalues), spec.order)
    weights = np.abs(basis @ result.theta.theta)
    top = weights[1800:].mean()
    middle = weights[200:1800].mean()
    assert top > middle

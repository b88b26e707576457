"""Shared graph fixtures: tiny closed-form graphs and SBM builders."""

import numpy as np
import pytest

from spectral_pe import (FeatureGenParams, Graph, gen_features,
                         sbm_community_labels, sbm_from_homophily,
                         sbm_generate)

# 3-regular frozen instance used by the distance-approximation tests:
# its smallest shifted-eigenvalue gap (0.0579) is large for n=20, which
# is what the bump construction needs
CUBIC20_EDGES = [
    (0, 3), (0, 15), (0, 19), (1, 4), (1, 10), (1, 17), (2, 4), (2, 5),
    (2, 12), (3, 9), (3, 12), (4, 14), (5, 6), (5, 18), (6, 10), (6, 18),
    (7, 13), (7, 15), (7, 16), (8, 9), (8, 11), (8, 19), (9, 15), (10, 17),
    (11, 13), (11, 16), (12, 17), (13, 14), (14, 19), (16, 18),
]


def graph_from_edges(n, edges, labels=None, features=None):
    g, _ = Graph.from_edge_array(n, np.asarray(edges, dtype=np.int64),
                                 labels=labels, features=features)
    return g


@pytest.fixture
def k2():
    return graph_from_edges(2, [(0, 1)])


@pytest.fixture
def triangle():
    return graph_from_edges(3, [(0, 1), (0, 2), (1, 2)])


@pytest.fixture
def p3():
    return graph_from_edges(3, [(0, 1), (1, 2)])


@pytest.fixture
def p4():
    return graph_from_edges(4, [(0, 1), (1, 2), (2, 3)])


@pytest.fixture
def k22():
    return graph_from_edges(4, [(0, 2), (0, 3), (1, 2), (1, 3)])


@pytest.fixture
def cubic20():
    return graph_from_edges(20, CUBIC20_EDGES)


def binary_sbm(h, n=2000, seed=0, avg_degree=10.0, dim=10, mu=0.05, sigma=1.0):
    """Featured binary SBM with the harness's seed-offset convention."""
    params = sbm_from_homophily(n=n, k=2, h=h, avg_degree=avg_degree)
    g = sbm_generate(params, seed=seed)
    labels = sbm_community_labels(n, 2)
    feats = None
    if dim > 0:
        feats = gen_features(labels, FeatureGenParams(mode="binary", dim=dim,
                                                      mu=mu, sigma=sigma),
                             seed=seed + 1)
    return Graph(indptr=g.indptr, indices=g.indices, features=feats,
                 labels=labels)

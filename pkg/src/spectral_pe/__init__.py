"""Spectral positional encodings for node classification on graphs.

Builds learnable and fixed Laplacian positional encodings, the
Chebyshev machinery behind them, spectral distance kernels, community
recovery baselines, and a sweep harness that measures how each encoding
behaves as edge homophily varies.
"""

from .chebyshev import (ChebyshevSeries, cheb_basis, cheb_fit,
                        monic_cheb_basis, monic_scale)
from .community import (Partition, RecoveryReport, align_errors,
                        concentration_check, expected_laplacian,
                        expected_spectrum, kmeans, spectral_partition)
from .distances import (CommuteEstimate, DistanceMatrix, SpectralKernel,
                        bump_llpe_construct, commute_mc_oracle,
                        spectral_distance_matrix)
from .encodings import (EncodingSpec, LlpeParams, PositionalEncoding,
                        build_encoding, llpe_forward, llpe_grad, reg_penalty,
                        rwse)
from .errors import (CapacityError, ConfigurationError, ConvergenceError,
                     FittingError, GenerationError, GraphFormatError,
                     KernelError, ParameterError, ReachabilityError,
                     SpectralPEError, TrainingError)
from .graph_io import load_graph, save_graph
from .graphs import (FeatureGenParams, Graph, PaParams, SbmParams,
                     edge_homophily, gen_features, local_homophily,
                     local_homophily_profile, normalized_laplacian,
                     pa_generate, quintile_bucketing, sbm_community_labels,
                     sbm_from_homophily, sbm_generate)
from .harness import (BenchRow, ExperimentConfig, SensitivityRow, SweepRow,
                      bench_eigs, rademacher_estimate, run_cell, run_sweep,
                      sensitivity_sweeps, summarize_rows)
from .learner import (ClassifierConfig, Split, TrainResult,
                      evaluate_by_quintile, split_nodes,
                      train_node_classifier)
from .spectral import (SpectralDecomposition, canonicalize_kernel,
                       extremal_eigs, full_eigh, load_spectrum_csv,
                       normalize_eigenvalues, normalize_signs, operator_norm,
                       save_spectrum_csv)

__version__ = "0.1.0"

__all__ = [
    "BenchRow", "CapacityError", "ChebyshevSeries", "ClassifierConfig",
    "CommuteEstimate", "ConfigurationError", "ConvergenceError",
    "DistanceMatrix", "EncodingSpec", "ExperimentConfig", "FeatureGenParams",
    "FittingError", "GenerationError", "Graph", "GraphFormatError",
    "KernelError", "LlpeParams", "PaParams", "ParameterError", "Partition",
    "PositionalEncoding", "ReachabilityError", "RecoveryReport", "SbmParams",
    "SensitivityRow", "SpectralDecomposition", "SpectralKernel",
    "SpectralPEError", "Split", "SweepRow", "TrainResult", "TrainingError",
    "align_errors", "bench_eigs", "build_encoding", "bump_llpe_construct",
    "canonicalize_kernel", "cheb_basis", "cheb_fit",
    "commute_mc_oracle", "concentration_check",
    "edge_homophily", "evaluate_by_quintile", "expected_laplacian",
    "expected_spectrum", "extremal_eigs", "full_eigh", "gen_features",
    "kmeans", "llpe_forward", "llpe_grad", "load_graph", "load_spectrum_csv",
    "local_homophily", "local_homophily_profile", "monic_cheb_basis",
    "monic_scale", "normalize_eigenvalues", "normalize_signs",
    "normalized_laplacian", "operator_norm", "pa_generate",
    "quintile_bucketing", "rademacher_estimate", "reg_penalty", "run_cell",
    "run_sweep", "rwse", "save_graph", "save_spectrum_csv",
    "sbm_community_labels", "sbm_from_homophily", "sbm_generate",
    "sensitivity_sweeps", "spectral_distance_matrix", "spectral_partition",
    "split_nodes", "summarize_rows", "train_node_classifier",
]
